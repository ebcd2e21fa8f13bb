#include "qps/duality.hpp"

#include "qps/errors.hpp"
#include "qps/kernels.hpp"
#include "qps/parallel.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace qps {

namespace {

constexpr double pivot_floor = kernels::pivot_floor;
constexpr double golden_ratio_step = 0.3819660112501051;

long double frac(long double x) { return x - std::floor(x); }

// Golden-section minimization of g on [a, b] down to width tol.
template <class G>
long double golden_min(G&& g, long double a, long double b, long double tol) {
    long double c = a + golden_ratio_step * (b - a), d = b - golden_ratio_step * (b - a);
    double gc = g(c), gd = g(d);
    while (b - a > tol) {
        if (gc <= gd) {
            b = d;
            d = c;
            gd = gc;
            c = a + golden_ratio_step * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = b - golden_ratio_step * (b - a);
            gd = g(d);
        }
    }
    return gc <= gd ? c : d;
}

void fit_decay(bloch_solution& s) {
    int onset = std::max<long>(1, 3 * std::abs(s.n_tilde.value_or(0)));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (long k = -s.N; k <= s.N; ++k) {
        double v = std::abs(s.coeff(k));
        if (std::abs(k) < onset || !(v > 1e-14)) continue;
        double x = static_cast<double>(std::abs(k)), y = std::log(v);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++n;
    }
    s.decay_onset = onset;
    double den = n * sxx - sx * sx;
    s.decay_rate = (n >= 2 && den > 0) ? (n * sxy - sx * sy) / den : 0.0;
}

struct eigenpair {
    nearest_eigen e;
    std::vector<double> v;
};

eigenpair solve_at(double lambda, const scalar_map& f, long double alpha, long double theta, int N, double energy) {
    auto h = dual_matrix(lambda, f, alpha, theta, N);
    auto e = nearest_eigenvalue(h, energy);
    return {e, eigenvector(h, e.value)};
}

// Eigenvalue closest to energy, without the neighbour separation.
double nearest_value(const dual_operator& h, double energy) {
    int c = count_below(h, energy);
    double below = c > 0 ? eigenvalue_at(h, c - 1) : -INFINITY;
    double above = c < h.size() ? eigenvalue_at(h, c) : INFINITY;
    return energy - below <= above - energy ? below : above;
}

int argmax_site(const std::vector<double>& v, int N) {
    int best = 0;
    double bv = -1;
    // scan outward so ties keep the smaller |k|
    for (int r = 0; r <= N; ++r) {
        for (int k : {r, -r}) {
            double a = std::abs(v[k + N]);
            if (a > bv * (1 + 1e-12)) {
                bv = a;
                best = k;
            }
            if (r == 0) break;
        }
    }
    return best;
}

} // namespace

std::pair<double, double> dual_operator::bounds() const {
    double lo = INFINITY, hi = -INFINITY;
    const int n = size();
    for (int i = 0; i < n; ++i) {
        double r = 0;
        for (int k = 1; k <= bandwidth(); ++k) {
            if (i + k < n) r += std::abs(offdiag[k - 1][i]);
            if (i - k >= 0) r += std::abs(offdiag[k - 1][i - k]);
        }
        lo = std::min(lo, diag[i] - r);
        hi = std::max(hi, diag[i] + r);
    }
    return {lo - 1e-12, hi + 1e-12};
}

dual_operator dual_matrix(double lambda, const scalar_map& f, long double alpha, long double theta, int N) {
    const int b = f.band_limit();
    if (N < 4 * std::max(b, 1)) throw invalid_input("dual_matrix: truncation must be at least 4x the potential band");
    double scale = 0;
    for (int k = -b; k <= b; ++k) scale = std::max(scale, std::abs(f.coeff(k)));
    for (int k = -b; k <= b; ++k)
        if (std::abs(f.coeff(k).imag()) > 1e-14 * std::max(scale, 1.0) ||
            std::abs(f.coeff(k) - f.coeff(-k)) > 1e-14 * std::max(scale, 1.0))
            throw invalid_input("dual_matrix: potential must be even with real coefficients");
    dual_operator h;
    h.N = N;
    h.theta = theta;
    const int n = 2 * N + 1;
    h.diag.resize(n);
    for (int i = 0; i < n; ++i) {
        long double x = frac(theta + static_cast<long double>(i - N) * alpha);
        h.diag[i] = 2.0 * std::cos(two_pi * static_cast<double>(x)) + lambda * f.coeff(0).real();
    }
    h.offdiag.assign(b, {});
    for (int k = 1; k <= b; ++k) h.offdiag[k - 1].assign(n - k, lambda * f.coeff(k).real());
    return h;
}

int count_below(const dual_operator& h, double sigma) {
    const int n = h.size(), b = h.bandwidth();
    if (b == 0) {
        int c = 0;
        for (double d : h.diag) c += d < sigma;
        return c;
    }
    if (b == 1) {
        std::vector<double> o2(n - 1);
        for (int i = 0; i + 1 < n; ++i) o2[i] = h.offdiag[0][i] * h.offdiag[0][i];
        double s[1] = {sigma};
        int c[1] = {0};
        kernels::sturm_count_batch(h.diag, o2, s, c);
        return c[0];
    }
    // banded LDL^T without pivoting; l[i][t] = L(i, i - t)
    std::vector<double> d(n);
    std::vector<std::vector<double>> l(n, std::vector<double>(b + 1, 0.0));
    auto m = [&](int r, int c) -> double {
        if (r == c) return h.diag[r] - sigma;
        int lo = std::min(r, c), k = std::abs(r - c);
        return k <= b ? h.offdiag[k - 1][lo] : 0.0;
    };
    int count = 0;
    for (int i = 0; i < n; ++i) {
        double di = m(i, i);
        for (int t = 1; t <= b && i - t >= 0; ++t) di -= l[i][t] * l[i][t] * d[i - t];
        if (std::abs(di) < pivot_floor) di = -pivot_floor;
        d[i] = di;
        count += di < 0;
        for (int r = i + 1; r <= std::min(n - 1, i + b); ++r) {
            double v = m(r, i);
            for (int j = std::max(0, r - b); j < i; ++j) v -= l[r][r - j] * l[i][i - j] * d[j];
            l[r][r - i] = v / di;
        }
    }
    return count;
}

double eigenvalue_at(const dual_operator& h, int index) {
    if (index < 0 || index >= h.size()) throw invalid_input("eigenvalue_at: index out of range");
    auto [lo, hi] = h.bounds();
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (count_below(h, mid) <= index) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

nearest_eigen nearest_eigenvalue(const dual_operator& h, double energy) {
    const int n = h.size();
    int c = count_below(h, energy);
    nearest_eigen best;
    double below = c > 0 ? eigenvalue_at(h, c - 1) : -INFINITY;
    double above = c < n ? eigenvalue_at(h, c) : INFINITY;
    if (energy - below <= above - energy) {
        best.value = below;
        best.index = c - 1;
    } else {
        best.value = above;
        best.index = c;
    }
    double lower = best.index > 0 ? (best.index - 1 == c - 1 ? below : eigenvalue_at(h, best.index - 1)) : -INFINITY;
    double upper = best.index + 1 < n ? (best.index + 1 == c ? above : eigenvalue_at(h, best.index + 1)) : INFINITY;
    best.separation = std::min(best.value - lower, upper - best.value);
    return best;
}

std::vector<double> eigenvector(const dual_operator& h, double eigenvalue) {
    const int n = h.size(), b = h.bandwidth();
    auto factor = [&](double sigma, Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(n) * (2 * b + 1));
        for (int i = 0; i < n; ++i) {
            trip.emplace_back(i, i, h.diag[i] - sigma);
            for (int k = 1; k <= b && i + k < n; ++k) {
                trip.emplace_back(i, i + k, h.offdiag[k - 1][i]);
                trip.emplace_back(i + k, i, h.offdiag[k - 1][i]);
            }
        }
        Eigen::SparseMatrix<double> m(n, n);
        m.setFromTriplets(trip.begin(), trip.end());
        lu.compute(m);
        return lu.info() == Eigen::Success;
    };
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    double sigma = eigenvalue;
    double nudge = 1e-14 * std::max(1.0, std::abs(eigenvalue));
    int tries = 0;
    while (!factor(sigma, lu)) {
        sigma += nudge;
        nudge *= 4;
        if (++tries > 8) throw numerical_error("eigenvector", "shifted matrix could not be factored");
    }
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = 1.0 + 0.001 * ((i * 7919) % 101);
    for (int it = 0; it < 4; ++it) {
        Eigen::VectorXd y = lu.solve(x);
        double nrm = y.norm();
        if (!(nrm > 0) || !std::isfinite(nrm)) throw numerical_error("eigenvector", "inverse iteration diverged");
        x = y / nrm;
    }
    return {x.data(), x.data() + n};
}

bloch_solution bloch_at_theta(double lambda, const scalar_map& f, const frequency& freq, double energy,
                              long double theta, const bloch_options& opt) {
    const long double alpha = freq.value;
    bloch_solution s;
    s.energy = energy;
    s.theta = theta;
    int N = opt.N;
    eigenpair cur = solve_at(lambda, f, alpha, theta, N, energy);
    s.truncation_history.push_back({N, cur.e.value});
    while (true) {
        double tail = 0;
        for (int k = -N; k <= N; ++k)
            if (std::abs(k) > N / 2) tail += std::abs(cur.v[k + N]);
        double scale = std::abs(cur.v[N]);
        bool tail_ok = scale > 0 && tail / scale < opt.truncation_tolerance;
        if (s.truncation_history.size() >= 2) {
            double moved = std::abs(s.truncation_history.back().second -
                                    s.truncation_history[s.truncation_history.size() - 2].second);
            if (moved < opt.truncation_tolerance && tail_ok) break;
        }
        if (2 * N > opt.N_max) break;
        N *= 2;
        // track the branch: far-localized states of the larger truncation may sit closer to energy
        cur = solve_at(lambda, f, alpha, theta, N, cur.e.value);
        s.truncation_history.push_back({N, cur.e.value});
    }
    s.N = N;
    s.eigenvalue = cur.e.value;
    s.separation = cur.e.separation;
    if (!(std::abs(s.eigenvalue - energy) <= opt.energy_tolerance))
        throw numerical_error("find_bloch", "no eigenvalue of the dual operator within tolerance of E (distance " +
                                                std::to_string(std::abs(s.eigenvalue - energy)) + ")");
    double u0 = cur.v[N];
    double vmax = 0;
    for (double v : cur.v) vmax = std::max(vmax, std::abs(v));
    if (!(std::abs(u0) > 1e-12 * vmax)) throw numerical_error("find_bloch", "u_hat(0) vanishes; cannot normalize");
    s.u_hat.resize(cur.v.size());
    for (std::size_t i = 0; i < cur.v.size(); ++i) s.u_hat[i] = cur.v[i] / u0;
    s.duality_residual = duality_residual(s, freq, lambda, f);
    fit_decay(s);
    return s;
}

bloch_solution find_bloch(double lambda, const scalar_map& f, const frequency& freq, double energy,
                          const bloch_options& opt) {
    const long double alpha = freq.value;
    const int G = std::max(opt.theta_grid, 8);
    // Truncation boundary states can sit inside gaps; skip eigenvalues whose eigenvector lives
    // in the outer quarter of the window.
    auto distance = [&](long double th) {
        auto h = dual_matrix(lambda, f, alpha, th, opt.N);
        double v = nearest_value(h, energy);
        double d = std::abs(v - energy);
        auto x = eigenvector(h, v);
        double outer = 0;
        for (int k = -opt.N; k <= opt.N; ++k)
            if (4 * std::abs(k) > 3 * opt.N) outer += x[k + opt.N] * x[k + opt.N];
        return outer > 0.5 ? d + 1.0 : d;
    };
    std::vector<double> d(G + 1);
    parallel_for(d.size(), opt.jobs, [&](std::size_t j) { d[j] = distance(0.5L * j / G); });
    std::size_t jb = static_cast<std::size_t>(std::min_element(d.begin(), d.end()) - d.begin());
    long double a = 0.5L * (std::max<long>(static_cast<long>(jb) - 1, 0)) / G;
    long double b = 0.5L * std::min<long>(static_cast<long>(jb) + 1, G) / G;
    long double th = golden_min(distance, a, b, opt.theta_tolerance);

    // Gap edges sit at an extremum of the eigenvalue branch in theta; polish towards it.
    auto branch = [&](long double t) {
        return nearest_value(dual_matrix(lambda, f, alpha, t, opt.N), energy);
    };
    if (opt.edge) {
        // walk downhill with a growing window; other branches dip nearby, so stay local
        long double w = 1e-4L;
        double mid = branch(th), left = branch(th - w), right = branch(th + w);
        double sgn = left + right > 2 * mid ? 1.0 : -1.0;
        auto g = [&](long double t) { return sgn * branch(t); };
        for (int it = 0; it < 8; ++it) {
            long double t = golden_min(g, th - w, th + w, opt.theta_tolerance);
            bool at_boundary = std::abs(t - th) > 0.9L * w;
            th = t;
            if (!at_boundary) break;
            w *= 2;
        }
    } else {
        const long double w = 1e-4L;
        double left = branch(th - w), right = branch(th + w);
        if (left > energy && right > energy) th = golden_min(branch, th - w, th + w, opt.theta_tolerance);
        else if (left < energy && right < energy)
            th = golden_min([&](long double t) { return -branch(t); }, th - w, th + w, opt.theta_tolerance);
    }
    th = frac(th);

    // Recentre on the largest coefficient: shifting sites by k0 moves theta by k0 alpha.
    for (int pass = 0; pass < 4; ++pass) {
        auto ep = solve_at(lambda, f, alpha, th, opt.N, energy);
        int k0 = argmax_site(ep.v, opt.N);
        if (k0 == 0) break;
        th = frac(th + k0 * alpha);
    }
    bool reflected = false;
    if (th > 0.5L) {
        th = 1.0L - th;
        reflected = true;
    }
    auto s = bloch_at_theta(lambda, f, freq, energy, th, opt);
    s.reflected = reflected;
    return s;
}

std::optional<resonance> detect_resonance(const bloch_solution& sol, const frequency& freq, long n_max,
                                          double tolerance, long label) {
    const long double x = frac(2.0L * sol.theta);
    long best_n = 0;
    long double best = INFINITY;
    for (long r = 0; r <= n_max; ++r) {
        for (long n : {r, -r}) {
            long double dd = norm_dist(x - static_cast<long double>(n) * freq.value);
            if (dd < best * (1 - 1e-9L)) {
                best = dd;
                best_n = n;
            }
            if (r == 0) break;
        }
    }
    if (!(best < tolerance)) return std::nullopt;
    resonance r{best_n, static_cast<double>(best), 0.0};
    if (label != 0 && best_n != 0) r.label_ratio = std::abs(static_cast<double>(label)) / std::abs(static_cast<double>(best_n));
    return r;
}

bloch_solution snap_to_resonance(double lambda, const scalar_map& f, const frequency& freq, const bloch_solution& sol,
                                 long n_tilde, const bloch_options& opt) {
    const long double half = frac(0.5L * static_cast<long double>(n_tilde) * freq.value);
    // 2 theta = n alpha mod 1 has two solutions mod 1; keep the one nearest the located phase
    long double c1 = half, c2 = frac(half + 0.5L);
    long double th = norm_dist(c1 - sol.theta) <= norm_dist(c2 - sol.theta) ? c1 : c2;
    long n = n_tilde;
    bool reflected = sol.reflected;
    if (th > 0.5L) {
        th = 1.0L - th;
        n = -n;
        reflected = !reflected;
    }
    auto s = bloch_at_theta(lambda, f, freq, sol.energy, th, opt);
    s.reflected = reflected;
    s.n_tilde = n;
    s.resonance_defect = static_cast<double>(norm_dist(2.0L * th - static_cast<long double>(n) * freq.value));
    fit_decay(s);
    return s;
}

namespace {

int effective_band(const bloch_solution& s) {
    int nb = 0;
    for (long k = -s.N; k <= s.N; ++k)
        if (std::abs(s.coeff(k)) > 1e-18) nb = std::max<int>(nb, static_cast<int>(std::abs(k)));
    return nb;
}

vector_map build_U(const bloch_solution& s, long double alpha) {
    int nb = effective_band(s);
    vector_map U(nb, 1, false);
    cplx rot = std::exp(cplx(0, two_pi * static_cast<double>(frac(s.theta))));
    double tail = 0;
    for (long k = -s.N; k <= s.N; ++k) {
        double u = s.coeff(k);
        if (std::abs(k) > nb) {
            tail += std::abs(u) * std::sqrt(2.0);
            continue;
        }
        double ph = static_cast<double>(frac(-static_cast<long double>(k) * alpha));
        U.at(static_cast<int>(k)) = {rot * u, std::exp(cplx(0, two_pi * ph)) * u};
    }
    U.set_tail(tail);
    return U;
}

mat2c schrodinger_matrix(double energy, double lambda, const scalar_map& f, double x) {
    return {energy - lambda * f.eval(x).real(), -1.0, 1.0, 0.0};
}

} // namespace

double duality_residual(const bloch_solution& sol, const frequency& freq, double lambda, const scalar_map& f) {
    const long double alpha = freq.value;
    vector_map U = build_U(sol, alpha);
    U.set_tail(0);
    cplx rot = std::exp(cplx(0, two_pi * static_cast<double>(frac(sol.theta))));
    double worst = 0, scale = 0;
    const int M = 1024;
    for (int j = 0; j < M; ++j) {
        double x = static_cast<double>(j) / M;
        vec2c u = U.eval(x);
        vec2c u1 = U.eval(static_cast<double>(frac(static_cast<long double>(x) + alpha)));
        vec2c lhs = schrodinger_matrix(sol.eigenvalue, lambda, f, x) * u;
        vec2c d = lhs - rot * u1;
        worst = std::max(worst, vec_norm(d));
        scale = std::max(scale, vec_norm(u));
    }
    return worst / std::max(scale, 1e-300);
}

bloch_waves assemble_U(const bloch_solution& sol, const frequency& freq, double lambda, const scalar_map& f,
                       double tolerance) {
    if (!sol.n_tilde) throw invalid_input("assemble_U: resonance integer not set");
    const long n = *sol.n_tilde;
    const long double alpha = freq.value;
    bloch_waves w;
    w.U = build_U(sol, alpha);
    const int nb = w.U.band_limit();
    const int nh = 2 * nb + static_cast<int>(std::abs(n));
    w.U_hat = vector_map(nh, 2, false);
    for (int k = -nb; k <= nb; ++k) w.U_hat.at(2 * k + static_cast<int>(n)) = w.U.coeff(k);
    w.U_hat.set_tail(w.U.tail());
    long double j = 2.0L * sol.theta - static_cast<long double>(n) * alpha;
    w.sign = std::cos(pi * static_cast<double>(j - 2.0L * std::floor(j / 2.0L))) >= 0 ? 1 : -1;

    vector_map uh = w.U_hat;
    uh.set_tail(0);
    const int M = 2048;
    double worst = 0, worst_re = 0, worst_im = 0, scale = 0;
    for (int i = 0; i < M; ++i) {
        double x = 2.0 * i / M;
        vec2c a = uh.eval(x);
        vec2c b = uh.eval(std::fmod(x + static_cast<double>(alpha), 2.0));
        mat2c A = schrodinger_matrix(sol.eigenvalue, lambda, f, x);
        vec2c d = A * a - static_cast<double>(w.sign) * b;
        vec2c dr = A * vec2c{a.x.real(), a.y.real()} - static_cast<double>(w.sign) * vec2c{b.x.real(), b.y.real()};
        vec2c di = A * vec2c{a.x.imag(), a.y.imag()} - static_cast<double>(w.sign) * vec2c{b.x.imag(), b.y.imag()};
        worst = std::max(worst, vec_norm(d));
        worst_re = std::max(worst_re, vec_norm(dr));
        worst_im = std::max(worst_im, vec_norm(di));
        scale = std::max(scale, vec_norm(a));
    }
    w.residual = worst / scale;
    w.residual_real = worst_re / scale;
    w.residual_imag = worst_im / scale;
    if (!(w.residual <= tolerance))
        throw numerical_error("assemble_U", "Bloch wave relation residual " + std::to_string(w.residual) +
                                                " exceeds tolerance");
    return w;
}

double dual_counting_function(double lambda, const scalar_map& f, const frequency& freq, double energy, int N,
                              int theta_samples) {
    double acc = 0;
    for (int j = 0; j < theta_samples; ++j) {
        auto h = dual_matrix(lambda, f, freq.value, (j + 0.5L) / theta_samples, N);
        acc += static_cast<double>(count_below(h, energy)) / h.size();
    }
    return acc / theta_samples;
}

} // namespace qps
