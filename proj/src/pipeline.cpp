#include "qps/pipeline.hpp"

#include "qps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qps {

namespace {

/// Runs fn and rethrows library errors as numerical_error tagged with the stage name.
template <class F>
auto stage(const char* name, F&& fn) {
    try {
        return fn();
    } catch (const numerical_error&) {
        throw;
    } catch (const qps_error& e) {
        throw numerical_error(name, e.what());
    }
}

const gap_record* find_label(const std::vector<gap_record>& gaps, std::int64_t m) {
    for (const auto& g : gaps)
        if (g.m == m) return &g;
    return nullptr;
}

std::vector<gap_record> labeled_gaps(const band_structure& bs, const frequency& freq, int jobs) {
    label_options lo;
    lo.jobs = jobs;
    return label_gaps(bs, freq, lo);
}

constexpr double open_width = 1e-12;

} // namespace

band_structure approximant(double lambda, const scalar_map& f, const convergent& c, const pipeline_config& cfg) {
    spectrum_options opt = cfg.spectrum;
    opt.jobs = cfg.jobs;
    if (cfg.cache) return cfg.cache->bands(lambda, f, c.p, c.q, opt);
    return build_band_structure(lambda, f, c.p, c.q, opt);
}

gap_dossier analyze_gap(double lambda, const scalar_map& f, const frequency& freq, std::int64_t m,
                        const pipeline_config& cfg) {
    gap_dossier d;
    d.m = m;
    d.upper_edge = !cfg.lower_edge;

    stage("spectrum", [&] {
        d.approximant = freq.best_convergent(cfg.q_max);
        auto bs = approximant(lambda, f, d.approximant, cfg);
        auto gaps = labeled_gaps(bs, freq, cfg.jobs);
        const gap_record* g = find_label(gaps, m);
        if (!g || !(g->width > open_width))
            throw numerical_error("spectrum", "gap " + std::to_string(m) + " is not open at q = " +
                                                  std::to_string(d.approximant.q));
        d.e_minus = g->e_minus;
        d.e_plus = g->e_plus;
        d.width = g->width;
        if (g->flagged) d.notes.push_back("gap label flagged by the rotation-number check");
        return 0;
    });
    d.edge_energy = d.upper_edge ? d.e_plus : d.e_minus;

    bloch_options bopt = cfg.bloch;
    bopt.jobs = cfg.jobs;
    auto raw = stage("bloch", [&] { return find_bloch(lambda, f, freq, d.edge_energy, bopt); });
    auto res = stage("resonance", [&] {
        auto r = detect_resonance(raw, freq, cfg.n_max, 1e-6, m);
        if (!r) throw numerical_error("resonance", "Bloch phase is not resonant");
        return *r;
    });
    d.res = res;
    d.bloch = stage("resonance", [&] { return snap_to_resonance(lambda, f, freq, raw, res.n_tilde, bopt); });
    if (d.bloch.reflected) d.notes.push_back("theta reflected into [0, 1/2]");

    d.red = stage("reduction", [&] { return reduce_at_edge(d.bloch, freq, lambda, f, cfg.reduce); });
    d.relation_residual = d.red.waves.residual;
    if (d.red.flagged) d.notes.push_back("reduction residual above tolerance");
    d.mu_consistent = d.red.mu_agreement < 1e-6 && d.red.upper_edge_convention == d.upper_edge;
    d.collapsed = d.red.P.collapsed();
    if (d.collapsed) {
        d.notes.push_back("collapsed gap: mu vanishes, later stages skipped");
        return d;
    }

    d.av = stage("averages", [&] { return average_identities(d.red.R.R, d.red.P, freq.value); });
    const cocycle c = cocycle::schrodinger(lambda, f, freq.alpha(), d.red.energy);
    auto Pt = stage("perturbation", [&] { return perturbation_matrix(d.red.R.R, d.red.P, &c); });
    d.epsilon = stage("epsilon", [&] { return gap_edge_epsilon(*d.av, d.red.P); });
    d.eps_opposite_mu = d.epsilon * d.red.P.normalized_mu() < 0;
    d.width_slack = std::abs(d.epsilon) - d.width;
    d.width_bound = d.width_slack >= 0;

    d.shift = stage("rotation",
                    [&] { return rotation_shift_check(d.red.energy, d.epsilon, freq, lambda, f, cfg.rotation_iterations); });

    if (cfg.expansion_eps != 0) {
        d.expansion = stage("expansion", [&] {
            expansion_summary e;
            e.eps = cfg.expansion_eps;
            auto ds = double_step(d.red.P, Pt, e.eps, freq.value, 0.0);
            e.remainder_norm = ds.remainder_norm;
            e.identity_residual = ds.identity_residual;
            e.P2 = ds.P2;
            e.degree_before = d.red.R.degree;
            e.degree_after = composed_degree(d.red.R.R, ds.step1.R_step, ds.step2.R_step);
            mat2r D = ds.frak_P + e.eps * ds.frak_P1_exact;
            if (D.det() > 0 && D.b < 0) e.sqrt_delta = elliptic_normalize(D).sqrt_delta;
            return e;
        });
    }
    return d;
}

std::vector<gap_dossier> analyze_gaps(double lambda, const scalar_map& f, const frequency& freq,
                                      const std::vector<std::int64_t>& labels, const pipeline_config& cfg) {
    std::vector<gap_dossier> out;
    if (lambda == 0) return out;
    auto gaps = stage("spectrum", [&] {
        return labeled_gaps(approximant(lambda, f, freq.best_convergent(cfg.q_max), cfg), freq, cfg.jobs);
    });
    for (auto m : labels) {
        const gap_record* g = find_label(gaps, m);
        if (g && g->width > open_width) out.push_back(analyze_gap(lambda, f, freq, m, cfg));
    }
    return out;
}

decay_report decay_campaign(double lambda, const scalar_map& f, const frequency& freq,
                            const std::vector<std::int64_t>& labels, const pipeline_config& cfg) {
    if (labels.empty()) throw invalid_input("decay_campaign: no labels");
    std::int64_t max_abs = 0;
    for (auto m : labels) {
        if (m == 0) throw invalid_input("decay_campaign: label 0 has no gap");
        max_abs = std::max<std::int64_t>(max_abs, std::abs(m));
    }
    const std::int64_t q_min = cfg.q_min > 0 ? cfg.q_min : 4 * max_abs;
    std::vector<convergent> convs;
    for (const auto& c : freq.convergents_up_to(cfg.q_max))
        if (c.q >= q_min) convs.push_back(c);
    if (convs.empty()) throw invalid_input("decay_campaign: no convergent with q in [q_min, q_max]");

    decay_report rep;
    for (auto m : labels) {
        decay_row row;
        row.m = m;
        rep.rows.push_back(row);
    }
    for (std::size_t i = 0; i < convs.size(); ++i) {
        auto gaps = stage("spectrum", [&] { return labeled_gaps(approximant(lambda, f, convs[i], cfg), freq, cfg.jobs); });
        rep.convergents.push_back(convs[i]);
        for (auto& row : rep.rows) {
            const gap_record* g = find_label(gaps, row.m);
            double w = g ? g->width : 0.0;
            row.widths.push_back(w);
            row.width = w;
            row.e_minus = g ? g->e_minus : 0.0;
            row.e_plus = g ? g->e_plus : 0.0;
        }
        if (i == 0) continue;
        bool all = true;
        for (auto& row : rep.rows) {
            double w0 = row.widths[i - 1], w1 = row.widths[i];
            row.relative_change = (w0 > 0 && w1 > 0) ? std::abs(w1 - w0) / std::max(w0, w1) : INFINITY;
            row.stable = w0 > 0 && w1 > 0 &&
                         (row.relative_change < cfg.stable_relative || std::abs(w1 - w0) < cfg.stable_absolute);
            all = all && row.stable;
        }
        rep.all_stable = all;
        if (all) break;
    }

    std::vector<gap_record> fit_input;
    for (const auto& row : rep.rows) {
        if (row.stable) {
            gap_record r;
            r.m = row.m;
            r.width = row.width;
            fit_input.push_back(r);
        } else {
            rep.notes.push_back("label " + std::to_string(row.m) + " dropped from the fit: not stable");
        }
    }
    if (fit_input.size() >= 4) {
        rep.fit = gap_decay_fit(fit_input);
    } else {
        rep.notes.push_back("fewer than four stable labels: no fit");
    }

    std::vector<const decay_row*> sorted;
    for (const auto& row : rep.rows) sorted.push_back(&row);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const decay_row* a, const decay_row* b) { return std::abs(a->m) < std::abs(b->m); });
    rep.strictly_decreasing = sorted.front()->width > 0;
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (!(sorted[i]->width > 0 && sorted[i]->width < sorted[i - 1]->width)) rep.strictly_decreasing = false;

    // per |m|, the widest labeled gap represents that level
    std::map<std::int64_t, double> level;
    for (const auto& row : rep.rows) level[std::abs(row.m)] = std::max(level[std::abs(row.m)], row.width);
    double prev = INFINITY;
    for (std::int64_t k = 1;; ++k) {
        auto it = level.find(k);
        if (it == level.end() || !(it->second > 0) || !(it->second < prev)) break;
        prev = it->second;
        rep.monotone_through = k;
    }
    return rep;
}

homogeneity_report homogeneity_campaign(double lambda, const scalar_map& f, const frequency& freq,
                                        const std::vector<double>& sigmas, const pipeline_config& cfg) {
    if (sigmas.empty()) throw invalid_input("homogeneity_campaign: no window sizes");
    homogeneity_report rep;
    rep.approximant = freq.best_convergent(cfg.q_max);
    auto bs = stage("spectrum", [&] { return approximant(lambda, f, rep.approximant, cfg); });
    auto gaps = stage("labels", [&] { return labeled_gaps(bs, freq, cfg.jobs); });
    rep.overall_min = INFINITY;
    for (double sigma : sigmas) {
        homogeneity_row row;
        row.sigma = sigma;
        auto h = stage("homogeneity", [&] { return homogeneity_scan(bs, sigma, cfg.homogeneity_samples); });
        row.min_ratio = h.min_ratio;
        row.argmin = h.argmin;
        row.at_argmin = gap_sum_in_window(gaps, h.argmin, sigma);
        for (const auto& b : bs.bands) {
            for (double e : {b.lo, b.hi}) {
                auto s = gap_sum_in_window(gaps, e, sigma);
                row.max_gap_fraction = std::max(row.max_gap_fraction, s.total / sigma);
                row.max_gap_fraction_excluding_lowest =
                    std::max(row.max_gap_fraction_excluding_lowest, s.excluding_lowest / sigma);
            }
        }
        rep.overall_min = std::min(rep.overall_min, row.min_ratio);
        rep.rows.push_back(row);
    }
    std::vector<const homogeneity_row*> by_sigma;
    for (const auto& r : rep.rows) by_sigma.push_back(&r);
    std::stable_sort(by_sigma.begin(), by_sigma.end(),
                     [](const homogeneity_row* a, const homogeneity_row* b) { return a->sigma > b->sigma; });
    rep.non_decreasing = true;
    for (std::size_t i = 1; i < by_sigma.size(); ++i)
        if (by_sigma[i]->min_ratio < by_sigma[i - 1]->min_ratio - 1e-12) rep.non_decreasing = false;
    return rep;
}

namespace {

claim upper(std::string name, double measured, double bound) {
    return {std::move(name), measured <= bound, measured, bound, bound - measured};
}

claim lower(std::string name, double measured, double bound) {
    return {std::move(name), measured >= bound, measured, bound, measured - bound};
}

} // namespace

std::vector<claim> dossier_claims(const gap_dossier& d) {
    std::vector<claim> out;
    out.push_back(upper("bloch duality residual", d.bloch.duality_residual, 1e-6));
    double umax = 0;
    for (double v : d.bloch.u_hat) umax = std::max(umax, std::abs(v));
    out.push_back(upper("bloch coefficients bounded by u_hat(0)", umax, 1.0));
    out.push_back(upper("bloch decay rate negative", d.bloch.decay_rate, 0.0));
    out.push_back(lower("label ratio |m| / |n_tilde|", d.res.label_ratio, 0.0));
    out.push_back(upper("duality relation residual", d.relation_residual, 1e-6));
    out.push_back(upper("reduction off-normal-form residual", d.red.residual, 1e-8));
    out.push_back(upper("mu extractions agree", d.red.mu_agreement, 1e-6));
    if (d.collapsed) return out;
    const auto& av = *d.av;
    const double scale = std::max(1.0, av.r_norm * av.r_norm);
    out.push_back(upper("shift identities of R", av.shift_identity_defect, 1e-9 * scale));
    out.push_back(upper("column averages [R11^2] = [R21^2]", std::abs(av.r11_sq - av.r21_sq), 1e-9 * scale));
    out.push_back(lower("[R11^2] >= 1 / (2 |R|)", av.r11_sq, 1.0 / (2 * av.r_norm)));
    out.push_back(lower("averaged Gram determinant positive", av.wronskian, 0.0));
    out.push_back(lower("gap width <= |eps_m|", std::abs(d.epsilon), d.width));
    out.push_back(lower("eps_m opposite to mu", -d.epsilon * d.red.P.normalized_mu(), 0.0));
    if (d.shift) {
        double gap = std::abs(d.shift->rho_shifted - d.shift->rho_edge);
        out.push_back(lower("rotation number moves at E + eps_m", gap, d.shift->error_edge + d.shift->error_shifted));
        out.push_back(lower("rotation number monotone across the edge", d.shift->monotone ? 1.0 : 0.0, 1.0));
    }
    if (d.expansion) {
        auto e = *d.expansion;
        out.push_back(upper("expansion preserves degree", std::abs(e.degree_after - e.degree_before), 0.0));
        out.push_back(upper("expansion identity residual", e.identity_residual, 1e-8));
    }
    return out;
}

std::vector<claim> decay_claims(const decay_report& r) {
    std::vector<claim> out;
    out.push_back(lower("widths strictly decreasing in |m|", r.strictly_decreasing ? 1.0 : 0.0, 1.0));
    out.push_back(lower("labels monotone through |m|", static_cast<double>(r.monotone_through), 1.0));
    double worst = 0;
    for (const auto& row : r.rows) worst = std::max(worst, row.relative_change);
    out.push_back(upper("width change between the last two convergents", worst, 0.1));
    if (r.fit) {
        out.push_back(lower("decay rate gamma positive", r.fit->gamma, 0.0));
        out.push_back(upper("fit residual in ln(width)", r.fit->residual, 0.5));
    }
    return out;
}

std::vector<claim> homogeneity_claims(const homogeneity_report& r) {
    std::vector<claim> out;
    out.push_back(lower("min window ratio", r.overall_min, 0.5));
    out.push_back(lower("min ratio non-decreasing as sigma shrinks", r.non_decreasing ? 1.0 : 0.0, 1.0));
    double top = 0;
    for (const auto& row : r.rows) top = std::max(top, row.min_ratio);
    out.push_back(upper("window ratio at most 2", top, 2.0));
    return out;
}

} // namespace qps
