#include "qps/spectrum.hpp"
#include "qps/cocycle.hpp"
#include "qps/kernels.hpp"
#include "qps/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>

namespace qps {

namespace {

std::vector<double> slice_potential(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q,
                                    double theta) {
    std::vector<double> v(static_cast<std::size_t>(q));
    for (std::int64_t n = 0; n < q; ++n) {
        std::int64_t r = (n * p) % q;
        double x = theta + static_cast<double>(r) / static_cast<double>(q);
        x -= std::floor(x);
        v[static_cast<std::size_t>(n)] = lambda * f.eval(x).real();
    }
    return v;
}

// Floquet eigenvalues with u_{n+q} = s u_n, s = +1 (periodic) or -1 (antiperiodic).
std::vector<double> floquet_eigenvalues(const std::vector<double>& v, int s) {
    const int q = static_cast<int>(v.size());
    if (q == 1) return {v[0] + 2.0 * s};
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(q, q);
    for (int i = 0; i < q; ++i) h(i, i) = v[i];
    if (q == 2) {
        h(0, 1) = h(1, 0) = 1.0 + s;
    } else {
        for (int i = 0; i + 1 < q; ++i) h(i, i + 1) = h(i + 1, i) = 1.0;
        h(0, q - 1) = h(q - 1, 0) = s;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    std::vector<double> out(q);
    for (int i = 0; i < q; ++i) out[i] = es.eigenvalues()(i);
    return out;
}

// Sign of Delta(E) - 2s, using the scaled trace.
template <class T>
int edge_sign(T trace, int scalings, int s) {
    if (scalings > 0) return trace > 0 ? 1 : -1;
    T g = trace - 2 * s;
    return g > 0 ? 1 : (g < 0 ? -1 : 0);
}

void evaluate_signs(const std::vector<double>& v, const std::vector<double>& energies, const std::vector<int>& tags,
                    bool extended, std::vector<int>& out) {
    const std::size_t n = energies.size();
    out.resize(n);
    std::vector<int> sc(n);
    if (extended) {
        std::vector<long double> tr(n);
        kernels::discriminant_extended(v, energies, tr, sc);
        for (std::size_t i = 0; i < n; ++i) out[i] = edge_sign(tr[i], sc[i], tags[i]);
    } else {
        std::vector<double> tr(n);
        kernels::discriminant_batch(v, energies, tr, sc);
        for (std::size_t i = 0; i < n; ++i) out[i] = edge_sign(tr[i], sc[i], tags[i]);
    }
}

// Sharpen eigenvalue edges by lockstep bisection on Delta(E) - 2s.
void refine_edges(const std::vector<double>& v, std::vector<double>& e, const std::vector<int>& tags,
                  const spectrum_options& opt) {
    const std::size_t n = e.size();
    std::vector<double> lo(n), hi(n);
    std::vector<std::size_t> active;
    {
        std::vector<double> probes;
        std::vector<int> ptags;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i) {
            double d = INFINITY;
            if (i > 0) d = std::min(d, e[i] - e[i - 1]);
            if (i + 1 < n) d = std::min(d, e[i + 1] - e[i]);
            double h = std::min(1e-9, 0.45 * d);
            if (!(h > opt.bisection_tolerance)) continue;
            lo[i] = e[i] - h;
            hi[i] = e[i] + h;
            idx.push_back(i);
            probes.push_back(lo[i]);
            probes.push_back(hi[i]);
            ptags.push_back(tags[i]);
            ptags.push_back(tags[i]);
        }
        std::vector<int> sg;
        evaluate_signs(v, probes, ptags, opt.extended, sg);
        for (std::size_t k = 0; k < idx.size(); ++k)
            if (sg[2 * k] * sg[2 * k + 1] < 0) active.push_back(idx[k]);
    }
    std::vector<int> lo_sign(n);
    {
        std::vector<double> probes;
        std::vector<int> ptags;
        for (auto i : active) {
            probes.push_back(lo[i]);
            ptags.push_back(tags[i]);
        }
        std::vector<int> sg;
        evaluate_signs(v, probes, ptags, opt.extended, sg);
        for (std::size_t k = 0; k < active.size(); ++k) lo_sign[active[k]] = sg[k];
    }
    for (int iter = 0; iter < 64 && !active.empty(); ++iter) {
        std::vector<double> mids;
        std::vector<int> ptags;
        for (auto i : active) {
            mids.push_back(0.5 * (lo[i] + hi[i]));
            ptags.push_back(tags[i]);
        }
        std::vector<int> sg;
        evaluate_signs(v, mids, ptags, opt.extended, sg);
        std::vector<std::size_t> still;
        for (std::size_t k = 0; k < active.size(); ++k) {
            auto i = active[k];
            if (sg[k] == 0) {
                lo[i] = hi[i] = mids[k];
            } else if (sg[k] == lo_sign[i]) {
                lo[i] = mids[k];
            } else {
                hi[i] = mids[k];
            }
            if (hi[i] - lo[i] > opt.bisection_tolerance) still.push_back(i);
        }
        for (std::size_t k = 0; k < active.size(); ++k) {
            auto i = active[k];
            e[i] = 0.5 * (lo[i] + hi[i]);
        }
        active.swap(still);
    }
}

class measure_cdf {
public:
    explicit measure_cdf(const std::vector<band>& b) : bands_(b), prefix_(b.size() + 1, 0.0) {
        for (std::size_t i = 0; i < b.size(); ++i) prefix_[i + 1] = prefix_[i] + (b[i].hi - b[i].lo);
    }
    // Leb((-inf, x] intersected with the union)
    double operator()(double x) const {
        auto it = std::upper_bound(bands_.begin(), bands_.end(), x, [](double v, const band& bb) { return v < bb.lo; });
        std::size_t i = static_cast<std::size_t>(it - bands_.begin());
        if (i == 0) return 0.0;
        const band& b = bands_[i - 1];
        return prefix_[i - 1] + (std::min(x, b.hi) - b.lo);
    }
    double total() const { return prefix_.back(); }

private:
    const std::vector<band>& bands_;
    std::vector<double> prefix_;
};

double circular_distance(double a, double b) { return norm_dist(a - b); }

} // namespace

double band_structure::measure() const {
    double s = 0;
    for (const auto& b : bands) s += b.hi - b.lo;
    return s;
}

std::pair<double, double> bracketing_interval(double lambda, const scalar_map& f) {
    double r = 2.0 + std::abs(lambda) * f.l1_norm() + 1.0;
    return {-r, r};
}

std::vector<double> slice_edges(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q, double theta,
                                const spectrum_options& opt) {
    auto v = slice_potential(lambda, f, p, q, theta);
    auto per = floquet_eigenvalues(v, 1);
    auto anti = floquet_eigenvalues(v, -1);
    std::vector<std::pair<double, int>> tagged;
    for (double x : per) tagged.push_back({x, 1});
    for (double x : anti) tagged.push_back({x, -1});
    std::sort(tagged.begin(), tagged.end());
    std::vector<double> e;
    std::vector<int> tags;
    for (auto& t : tagged) {
        e.push_back(t.first);
        tags.push_back(t.second);
    }
    refine_edges(v, e, tags, opt);
    std::sort(e.begin(), e.end());
    return e;
}

band_structure build_band_structure(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q,
                                    const spectrum_options& opt) {
    if (q < 1) throw invalid_input("band_structure: q must be positive");
    if (std::gcd(p, q) != 1) throw invalid_input("band_structure: p and q must be coprime");
    int samples = opt.theta_samples > 0 ? opt.theta_samples : static_cast<int>(4 * q);
    if (samples < 4 * q) throw invalid_input("band_structure: theta_samples must be at least 4q");

    band_structure bs;
    bs.p = p;
    bs.q = q;
    bs.lambda = lambda;
    bs.potential = f;
    bs.theta_grid = samples;
    bs.extended = opt.extended;

    const int slices = std::max(4, static_cast<int>((samples + q - 1) / q));
    const double dtheta = 1.0 / samples;
    std::vector<std::vector<double>> edges(slices);
    parallel_for(slices, opt.jobs, [&](std::size_t j) {
        edges[j] = slice_edges(lambda, f, p, q, static_cast<double>(j) * dtheta, opt);
    });

    const int nq = static_cast<int>(q);
    bs.index_bands.resize(nq);
    std::vector<int> refine_lo, refine_hi;
    for (int i = 0; i < nq; ++i) {
        double a = INFINITY, a_max = -INFINITY, b = -INFINITY, b_min = INFINITY;
        for (int j = 0; j < slices; ++j) {
            a = std::min(a, edges[j][2 * i]);
            a_max = std::max(a_max, edges[j][2 * i]);
            b = std::max(b, edges[j][2 * i + 1]);
            b_min = std::min(b_min, edges[j][2 * i + 1]);
        }
        bs.index_bands[i] = {a, b, false};
        if (a_max - a > opt.e_resolution) refine_lo.push_back(i);
        if (b - b_min > opt.e_resolution) refine_hi.push_back(i);
    }

    // Golden-section search for the extremal theta of edges that vary across slices.
    auto extremal = [&](int i, bool lower) {
        int edge = lower ? 2 * i : 2 * i + 1;
        double sgn = lower ? 1.0 : -1.0;
        int jbest = 0;
        for (int j = 1; j < slices; ++j)
            if (sgn * edges[j][edge] < sgn * edges[jbest][edge]) jbest = j;
        double left = (jbest - 1) * dtheta, right = (jbest + 1) * dtheta;
        auto value = [&](double th) { return sgn * slice_edges(lambda, f, p, q, th, opt)[edge]; };
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = right - g * (right - left), x2 = left + g * (right - left);
        double f1 = value(x1), f2 = value(x2);
        double best = sgn * edges[jbest][edge];
        int used = 2;
        while (used < opt.refine_budget && right - left > 1e-13) {
            if (f1 < f2) {
                right = x2;
                x2 = x1;
                f2 = f1;
                x1 = right - g * (right - left);
                f1 = value(x1);
            } else {
                left = x1;
                x1 = x2;
                f1 = f2;
                x2 = left + g * (right - left);
                f2 = value(x2);
            }
            ++used;
        }
        best = std::min(best, std::min(f1, f2));
        bool unresolved = right - left > 1e-9 * dtheta;
        return std::make_pair(sgn * best, unresolved);
    };
    std::vector<std::pair<double, bool>> lo_ref(refine_lo.size()), hi_ref(refine_hi.size());
    parallel_for(refine_lo.size(), opt.jobs, [&](std::size_t k) { lo_ref[k] = extremal(refine_lo[k], true); });
    parallel_for(refine_hi.size(), opt.jobs, [&](std::size_t k) { hi_ref[k] = extremal(refine_hi[k], false); });
    for (std::size_t k = 0; k < refine_lo.size(); ++k) {
        auto& b = bs.index_bands[refine_lo[k]];
        b.lo = std::min(b.lo, lo_ref[k].first);
        b.flagged = b.flagged || lo_ref[k].second;
    }
    for (std::size_t k = 0; k < refine_hi.size(); ++k) {
        auto& b = bs.index_bands[refine_hi[k]];
        b.hi = std::max(b.hi, hi_ref[k].first);
        b.flagged = b.flagged || hi_ref[k].second;
    }

    for (int i = 0; i < nq; ++i) {
        const band& ib = bs.index_bands[i];
        if (!bs.bands.empty() && ib.lo <= bs.bands.back().hi + opt.e_resolution) {
            bs.bands.back().hi = std::max(bs.bands.back().hi, ib.hi);
            bs.bands.back().flagged = bs.bands.back().flagged || ib.flagged;
            bs.below.back() = i + 1;
        } else {
            bs.bands.push_back(ib);
            bs.below.push_back(i + 1);
        }
        if (ib.flagged) ++bs.flagged;
    }
    return bs;
}

ids_value ids(const band_structure& bs, double energy) {
    std::int64_t j = 0;
    for (std::size_t i = 0; i < bs.bands.size(); ++i) {
        const band& b = bs.bands[i];
        if (energy >= b.lo && energy <= b.hi) throw invalid_input("ids: energy lies inside a band");
        if (b.hi < energy) j = bs.below[i];
    }
    return {j, bs.q};
}

ids_value ids(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q, double energy) {
    return ids(build_band_structure(lambda, f, p, q), energy);
}

std::int64_t label_for_ids(std::int64_t j, std::int64_t p, std::int64_t q, bool opposite_sign) {
    if (q == 1) return 0;
    std::int64_t inv = mod_inverse(p, q);
    std::int64_t target = opposite_sign ? j : -j;
    std::int64_t m = (((target % q) + q) % q) * inv % q;
    if (2 * m > q) m -= q;
    return m;
}

std::vector<gap_record> label_gaps(const band_structure& bs, const frequency& freq, const label_options& opt) {
    std::vector<gap_record> out;
    if (bs.bands.size() < 2) return out;
    const std::int64_t p = bs.p, q = bs.q;
    out.resize(bs.bands.size() - 1);
    parallel_for(out.size(), opt.jobs, [&](std::size_t i) {
        gap_record r;
        r.e_minus = bs.bands[i].hi;
        r.e_plus = bs.bands[i + 1].lo;
        r.width = r.e_plus - r.e_minus;
        r.ids_num = bs.below[i];
        r.ids_den = q;
        r.m = label_for_ids(r.ids_num, p, q, opt.opposite_sign);
        double mid = 0.5 * (r.e_minus + r.e_plus);
        double target = static_cast<double>(((r.m * p) % q + q) % q) / static_cast<double>(q);
        auto c = cocycle::schrodinger_rational(bs.lambda, bs.potential, p, q, mid);
        rotation_options ro;
        ro.iterations = opt.iterations;
        auto rho = rotation_number(c, ro);
        double two_rho = opt.opposite_sign ? -2.0 * rho.rho : 2.0 * rho.rho;
        r.rho_resid = circular_distance(two_rho, target);
        if (opt.irrational_check) {
            auto ci = cocycle::schrodinger(bs.lambda, bs.potential, freq.alpha(), mid);
            auto ri = rotation_number(ci, ro);
            double t2 = opt.opposite_sign ? -2.0 * ri.rho : 2.0 * ri.rho;
            r.rho_resid_irrational =
                circular_distance(t2, static_cast<double>(static_cast<long double>(r.m) * freq.value));
        }
        r.flagged = !(r.rho_resid < opt.tolerance);
        out[i] = r;
    });
    return out;
}

decay_fit gap_decay_fit(const std::vector<gap_record>& records) {
    decay_fit fit;
    std::vector<double> xs, ys;
    for (const auto& r : records) {
        if (!(r.width > 0)) {
            fit.notes.push_back("label " + std::to_string(r.m) + " excluded: zero width");
            continue;
        }
        xs.push_back(static_cast<double>(std::abs(r.m)));
        ys.push_back(std::log(r.width));
    }
    if (xs.size() < 4) throw invalid_input("gap_decay_fit: need at least four nonzero-width records");
    const double n = static_cast<double>(xs.size());
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0)) throw invalid_input("gap_decay_fit: labels must span more than one |m|");
    double slope = sxy / sxx;
    fit.gamma = -slope;
    fit.intercept = my - slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double d = ys[i] - (fit.intercept + slope * xs[i]);
        fit.residual = std::max(fit.residual, std::abs(d));
        ss += d * d;
    }
    fit.rms = std::sqrt(ss / n);
    fit.points = static_cast<int>(xs.size());
    return fit;
}

double window_ratio(const band_structure& bs, double energy, double sigma) {
    measure_cdf cdf(bs.bands);
    return (cdf(energy + sigma) - cdf(energy - sigma)) / sigma;
}

homogeneity_result homogeneity_scan(const band_structure& bs, double sigma, int e_samples) {
    if (!(sigma > 0)) throw invalid_input("homogeneity_scan: sigma must be positive");
    measure_cdf cdf(bs.bands);
    std::vector<double> pts;
    for (const auto& b : bs.bands) {
        pts.push_back(b.lo);
        pts.push_back(b.hi);
    }
    const double total = cdf.total();
    if (total > 0 && e_samples > 0) {
        std::size_t bi = 0;
        double acc = 0;
        for (int k = 0; k < e_samples; ++k) {
            double target = (k + 0.5) / e_samples * total;
            while (bi + 1 < bs.bands.size() && acc + (bs.bands[bi].hi - bs.bands[bi].lo) < target) {
                acc += bs.bands[bi].hi - bs.bands[bi].lo;
                ++bi;
            }
            pts.push_back(std::min(bs.bands[bi].hi, bs.bands[bi].lo + (target - acc)));
        }
    }
    homogeneity_result r;
    r.min_ratio = INFINITY;
    for (double e : pts) {
        double ratio = (cdf(e + sigma) - cdf(e - sigma)) / sigma;
        if (ratio < r.min_ratio) {
            r.min_ratio = ratio;
            r.argmin = e;
        }
    }
    r.samples = static_cast<int>(pts.size());
    return r;
}

window_gap_sum gap_sum_in_window(const std::vector<gap_record>& records, double energy, double sigma) {
    window_gap_sum s;
    double lowest_overlap = 0;
    for (const auto& r : records) {
        double ov = std::min(r.e_plus, energy + sigma) - std::max(r.e_minus, energy - sigma);
        if (!(ov > 0)) continue;
        s.total += ov;
        if (s.lowest_label == 0 || std::abs(r.m) < std::abs(s.lowest_label)) {
            s.lowest_label = r.m;
            lowest_overlap = ov;
        }
    }
    s.excluding_lowest = s.total - lowest_overlap;
    return s;
}

separation_report gap_separation_check(const std::vector<gap_record>& records, double beta,
                                       std::optional<std::pair<double, double>> extent) {
    if (records.size() < 2) throw invalid_input("gap_separation_check: need at least two labeled gaps");
    separation_report rep;
    rep.beta = beta;
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t j = i + 1; j < records.size(); ++j) {
            const gap_record* a = &records[i];
            const gap_record* b = &records[j];
            if (std::abs(a->m) > std::abs(b->m)) std::swap(a, b);
            double d = std::max(0.0, std::max(b->e_minus - a->e_plus, a->e_minus - b->e_plus));
            separation_pair pr{a->m, b->m, d, d * std::exp(8.0 * beta * std::abs(static_cast<double>(b->m)))};
            rep.pairs.push_back(pr);
            rep.min_distance = std::min(rep.min_distance, d);
            rep.min_rescaled = std::min(rep.min_rescaled, pr.rescaled);
            if (!(d > 0)) rep.all_positive = false;
        }
    }
    if (extent) {
        for (const auto& r : records) {
            double d = std::min(r.e_minus - extent->first, extent->second - r.e_plus);
            rep.edge_pairs.push_back({r.m, 0, d, d * std::exp(8.0 * beta * std::abs(static_cast<double>(r.m)))});
            if (!(d > 0)) rep.all_positive = false;
        }
    }
    return rep;
}

holder_report holder_check(double lambda, const scalar_map& f, double alpha, int e_pairs, const holder_options& opt) {
    if (e_pairs < 2) throw invalid_input("holder_check: need at least two energies");
    auto [lo, hi] = bracketing_interval(lambda, f);
    holder_report rep;
    for (int level = 0; level < opt.levels; ++level) {
        int n = e_pairs << level;
        std::vector<double> es(n), rho(n);
        for (int i = 0; i < n; ++i) es[i] = lo + (hi - lo) * i / (n - 1);
        parallel_for(n, opt.jobs, [&](std::size_t i) {
            rotation_options ro;
            ro.iterations = opt.iterations;
            rho[i] = rotation_number(cocycle::schrodinger(lambda, f, alpha, es[i]), ro).rho;
        });
        double best = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double de = std::abs(es[j] - es[i]);
                if (de < 1e-10) continue;
                best = std::max(best, std::abs(rho[j] - rho[i]) / std::sqrt(de));
            }
        rep.level_max.push_back(best);
        rep.level_points.push_back(n);
    }
    if (rep.level_max.size() >= 2) {
        double a = rep.level_max[rep.level_max.size() - 2], b = rep.level_max.back();
        rep.relative_change = std::abs(b - a) / std::max(std::abs(b), 1e-300);
        rep.stabilized = rep.relative_change < 0.1;
    }
    return rep;
}

} // namespace qps
