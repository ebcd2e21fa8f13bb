#include "qps/reducibility.hpp"

#include "qps/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>

namespace qps {

namespace {

cplx unit(long k, long double alpha, int period) {
    long double t = static_cast<long double>(k) * alpha / period;
    t -= std::floor(t);
    return std::exp(cplx(0, two_pi * static_cast<double>(t)));
}

double wrap(long double x, int period) {
    long double p = period;
    return static_cast<double>(x - p * std::floor(x / p));
}

template <class V>
fourier_map<V> compact(const fourier_map<V>& m, double rel = 1e-15) {
    double top = 0;
    for (const auto& c : m.coefficients()) top = std::max(top, detail::value_norm(c));
    int keep = 0;
    for (int k = 0; k <= m.band_limit(); ++k)
        if (detail::value_norm(m.coeff(k)) > rel * top || detail::value_norm(m.coeff(-k)) > rel * top) keep = k;
    return m.truncated(keep);
}

int pow2_at_least(int n) {
    int m = 1;
    while (m < n) m *= 2;
    return m;
}

bool is_parabolic(const mat2r& P) {
    return P.c == 0.0 && P.a == P.d && std::abs(P.a) == 1.0;
}

// (e^{tY} - I - tY) / t^2 by its power series; converges fast for |tY| <= 1.
mat2c exp_remainder(const mat2c& Y, double t) {
    mat2c term = 0.5 * (Y * Y);
    mat2c sum = term;
    for (int k = 3; k < 60; ++k) {
        term = (t / k) * (term * Y);
        sum += term;
        if (max_abs(term) <= 1e-18 * max_abs(sum)) break;
    }
    return sum;
}

// Sup over [0, period) of |B(x)| for a function of x, on an offset grid.
template <class F>
double sup_on_grid(F&& fn, int period, int grid) {
    double best = 0;
    for (int j = 0; j < grid; ++j) best = std::max(best, fn(period * (j + 0.5) / grid));
    return best;
}

double finite_or_inf(double v) { return std::isfinite(v) ? v : INFINITY; }

} // namespace

scalar_map solve_homological_scalar(const scalar_map& nu, long double alpha, int sign, double divisor_cutoff) {
    if (sign != 1 && sign != -1) throw invalid_input("solve_homological_scalar: sign must be +-1");
    const int n = nu.band_limit();
    scalar_map phi(n, nu.period(), nu.real_valued());
    double dmin = INFINITY;
    for (int k = -n; k <= n; ++k) {
        if (k == 0) continue;
        cplx d = unit(k, alpha, nu.period()) - 1.0;
        if (nu.coeff(k) == cplx(0)) continue;
        if (std::abs(d) < divisor_cutoff)
            throw small_divisor_error("solve_homological_scalar: divisor below cutoff at k=" + std::to_string(k), k);
        dmin = std::min(dmin, std::abs(d));
        phi.at(k) = static_cast<double>(sign) * nu.coeff(k) / d;
    }
    phi.set_tail(std::isfinite(dmin) ? nu.tail() / dmin : nu.tail());
    return phi;
}

matrix_map solve_homological_parabolic(const matrix_map& G, const parabolic_form& P, long double alpha,
                                       double divisor_cutoff) {
    if (P.sign != 1 && P.sign != -1) throw invalid_input("solve_homological_parabolic: sign must be +-1");
    // P = s J with J = [[1, mu'], [0, 1]]: solve Y(x+a) J - J Y = s G
    const double s = P.sign, mu = P.normalized_mu();
    const int n = G.band_limit();
    matrix_map Y(n, G.period(), G.real_valued());
    double dmin = INFINITY;
    for (int k = -n; k <= n; ++k) {
        if (k == 0) continue;
        mat2c g = s * G.coeff(k);
        if (g == mat2c{}) continue;
        cplx e = unit(k, alpha, G.period());
        cplx d = e - 1.0;
        double ad = std::abs(d);
        auto breach = [&](const char* entry) {
            throw small_divisor_error(std::string("solve_homological_parabolic: divisor below cutoff at k=") +
                                          std::to_string(k) + " (entry " + entry + ")",
                                      k, entry);
        };
        if (ad < divisor_cutoff) {
            if (g.c != cplx(0)) breach("21");
            if (g.a != cplx(0)) breach("11");
            if (g.d != cplx(0)) breach("22");
            breach("12");
        }
        // entries 11, 22 and 12 pick up a second divisor through mu * Y21
        if (mu != 0.0 && g.c != cplx(0) && ad * ad < divisor_cutoff) breach("11");
        dmin = std::min(dmin, ad);
        mat2c y;
        y.c = g.c / d;
        y.a = (g.a + mu * y.c) / d;
        y.d = (g.d - e * mu * y.c) / d;
        y.b = (g.b - e * mu * y.a + mu * y.d) / d;
        Y.at(k) = y;
    }
    Y.set_tail(std::isfinite(dmin) ? G.tail() * (1 + std::abs(mu) / dmin) * (1 + std::abs(mu) / dmin) / dmin
                                   : G.tail());
    return Y;
}

matrix_map solve_homological_general(const matrix_map& G, const mat2r& P, long double alpha, double divisor_cutoff) {
    const int n = G.band_limit();
    matrix_map Y(n, G.period(), G.real_valued());
    const std::array<std::array<double, 2>, 2> p{{{P.a, P.b}, {P.c, P.d}}};
    double smin_all = INFINITY;
    for (int k = -n; k <= n; ++k) {
        if (k == 0) continue;
        mat2c g = G.coeff(k);
        if (g == mat2c{}) continue;
        cplx e = unit(k, alpha, G.period());
        // row-major vec: (e Y P - P Y)_{ij} = sum_l e Y_il P_lj - P_il Y_lj
        Eigen::Matrix4cd M = Eigen::Matrix4cd::Zero();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        cplx v = 0;
                        if (a == i) v += e * p[b][j];
                        if (b == j) v -= p[i][a];
                        M(2 * i + j, 2 * a + b) = v;
                    }
        Eigen::JacobiSVD<Eigen::Matrix4cd> svd(M);
        double smin = svd.singularValues()(3);
        if (smin < divisor_cutoff)
            throw small_divisor_error("solve_homological_general: singular mode at k=" + std::to_string(k), k,
                                      "general");
        smin_all = std::min(smin_all, smin);
        Eigen::Vector4cd rhs(g.a, g.b, g.c, g.d);
        Eigen::Vector4cd y = M.fullPivLu().solve(rhs);
        Y.at(k) = {y(0), y(1), y(2), y(3)};
    }
    Y.set_tail(std::isfinite(smin_all) ? G.tail() / smin_all : G.tail());
    return Y;
}

double homological_residual(const matrix_map& Y, const matrix_map& G, const mat2r& P, long double alpha, int grid) {
    const mat2c Pc = to_complex(P);
    const mat2c mean = average(G);
    const int per = G.period();
    double worst = 0, scale = 0;
    for (int j = 0; j < grid; ++j) {
        double x = static_cast<double>(per) * j / grid;
        mat2c g = G.eval(x) - mean;
        mat2c lhs = Y.eval(wrap(x + alpha, per)) * Pc - Pc * Y.eval(x);
        worst = std::max(worst, max_abs(lhs - g));
        scale = std::max(scale, max_abs(g));
    }
    return scale > 0 ? worst / scale : worst;
}

averaging_result averaging_step(const mat2r& P, const matrix_map& Ptilde, double eps, long double alpha, double delta,
                                const averaging_options& opt, const mat2r* homological_P) {
    if (!(eps != 0.0) || !std::isfinite(eps)) throw invalid_input("averaging_step: eps must be finite and nonzero");
    if (Ptilde.period() != 1) throw period_mismatch("averaging_step: perturbation must have period 1");
    averaging_result out;
    auto& rep = out.report;
    rep.eps = eps;
    rep.delta = delta;

    const mat2r Q = homological_P ? *homological_P : P;
    matrix_map Y = is_parabolic(Q)
                       ? solve_homological_parabolic(Ptilde, parabolic_form{Q.a > 0 ? 1 : -1, Q.b}, alpha,
                                                     opt.divisor_cutoff)
                       : solve_homological_general(Ptilde, Q, alpha, opt.divisor_cutoff);
    for (int k = -Ptilde.band_limit(); k <= Ptilde.band_limit(); ++k)
        if (k != 0 && Ptilde.coeff(k) != mat2c{})
            rep.divisor_min = std::min(rep.divisor_min, std::abs(unit(k, alpha, 1) - 1.0));
    rep.homological_residual = homological_residual(Y, Ptilde, Q, alpha);
    // Keep R in SL(2): drop the trace of Y. It vanishes when tr(Q^{-1} Pt) = 0 (the first step); in the
    // second step its nonconstant part is of order eps and lands in the remainder through the defect below.
    rep.trace_y = sup_on_grid([&](double x) { return std::abs(Y.eval(x).trace()); }, 1, 1024);
    for (int k = -Y.band_limit(); k <= Y.band_limit(); ++k) {
        mat2c y = Y.coeff(k);
        cplx t = 0.5 * y.trace();
        y.a -= t;
        y.d -= t;
        Y.at(k) = y;
    }
    const mat2c Pc = to_complex(P);
    out.Y = Y;
    rep.y_norm = strip_norm(Y, delta).value;
    if (!(std::abs(eps) * rep.y_norm <= opt.admissible))
        throw numerical_error("averaging_step", "eps outside the admissible range: |eps Y|_delta = " +
                                                    std::to_string(std::abs(eps) * rep.y_norm));

    out.P_next = P + eps * real_part(average(Ptilde));

    // Defect of the homological equation against P, per mode: rounding only when Q = P, and
    // (P - Q)-sized otherwise. Per-mode evaluation keeps it decaying in k.
    matrix_map hmap(Ptilde.band_limit(), 1, Ptilde.real_valued());
    for (int k = -Ptilde.band_limit(); k <= Ptilde.band_limit(); ++k)
        if (k != 0) hmap.at(k) = Ptilde.coeff(k) - unit(k, alpha, 1) * Y.coeff(k) * Pc + Pc * Y.coeff(k);

    const int band = std::min(opt.band_limit, 3 * std::max(Y.band_limit(), Ptilde.band_limit()) + 8);
    const int M = pow2_at_least(4 * (2 * band + 1));
    std::vector<mat2c> r_s(M), p_s(M);
    for (int j = 0; j < M; ++j) {
        double x = static_cast<double>(j) / M;
        mat2c y = Y.eval(x), y1 = Y.eval(wrap(x + alpha, 1)), pt = Ptilde.eval(x);
        mat2c z = exp_remainder(y, eps), zm1 = exp_remainder(-1.0 * y1, eps);
        mat2c h = hmap.eval(x);
        mat2c L = -1.0 * y1 + eps * zm1, T = Pc + eps * pt, Rr = y + eps * z;
        p_s[j] = (1.0 / eps) * h + (-1.0 * y1 * pt + zm1 * Pc + pt * y + Pc * z) + eps * (zm1 * pt + pt * z) +
                 L * T * Rr;
        r_s[j] = mat2c::identity() + eps * Rr;
    }
    bool real = Ptilde.real_valued();
    out.Ptilde_next = compact(from_samples(p_s, 1, band, real));
    out.R_step = compact(from_samples(r_s, 1, band, real));

    matrix_map rmi = out.R_step;
    rmi.at(0) -= mat2c::identity();
    rep.r_minus_identity = strip_norm(rmi, delta).value;
    rep.p_shift = op_norm(out.P_next - P);
    rep.ptilde_next_norm = strip_norm(out.Ptilde_next, delta).value;

    const mat2c Pn = to_complex(out.P_next);
    const double ref = std::max(1.0, op_norm(P));
    rep.identity_residual = sup_on_grid(
        [&](double x) {
            mat2c lhs = out.R_step.eval(wrap(x + alpha, 1)).adj() * (Pc + eps * Ptilde.eval(x)) * out.R_step.eval(x);
            mat2c rhs = Pn + (eps * eps) * out.Ptilde_next.eval(x);
            return max_abs(lhs - rhs) / ref;
        },
        1, 1024);
    return out;
}

double_step_result double_step(const parabolic_form& P, const matrix_map& Ptilde, double eps, long double alpha,
                               double delta, const averaging_options& opt) {
    double_step_result out;
    const mat2r P0 = P.matrix();
    out.step1 = averaging_step(P0, Ptilde, eps, alpha, delta, opt);
    // the second equation is still solved against P, which leaves an order eps^3 remainder
    out.step2 = averaging_step(out.step1.P_next, out.step1.Ptilde_next, eps * eps, alpha, 0.0, opt, &P0);
    out.P2 = out.step2.P_next;
    out.Ptilde2 = scale(out.step2.Ptilde_next, eps);

    const auto& R1 = out.step1.R_step;
    const auto& R2 = out.step2.R_step;
    const int band = std::min(opt.band_limit, R1.band_limit() + R2.band_limit() + 8);
    const int M = pow2_at_least(4 * (2 * band + 1));
    std::vector<mat2c> rs(M);
    for (int j = 0; j < M; ++j) {
        double x = static_cast<double>(j) / M;
        rs[j] = R1.eval(x) * R2.eval(x);
    }
    out.R_total = compact(from_samples(rs, 1, band, R1.real_valued() && R2.real_valued()));

    const double s = P.sign, mu = P.normalized_mu();
    out.frak_P = logm(s * P0);
    // [Pt] = s [[b - mu a, c - mu b], [-a, -b]] with a = [R11^2], b = [R11 R12], c = [R12^2]
    const mat2r m = s * real_part(average(Ptilde));
    const double a = -m.c, b = -m.d, c = m.b + mu * b;
    out.frak_P1_closed = {b - 0.5 * mu * a, c - mu * b, -a, -b + 0.5 * mu * a};
    out.frak_P1_exact = out.frak_P1_closed;
    out.frak_P1_exact.b += mu * mu * a / 6;
    const double h = 1e-5;
    out.frak_P1_numeric =
        (1.0 / (2 * h)) * (logm(s * (P0 + h * real_part(average(Ptilde)))) - logm(s * (P0 - h * real_part(average(Ptilde)))));
    out.frak_P2 = (1.0 / (eps * eps)) * (logm(s * out.P2) - out.frak_P - eps * out.frak_P1_exact);

    const mat2r L2 = logm(s * out.P2);
    const double e3 = eps * eps * eps;
    out.remainder_norm = sup_on_grid(
        [&](double x) {
            mat2r full = s * (out.P2 + e3 * real_part(out.Ptilde2.eval(x)));
            return finite_or_inf(max_abs((1.0 / e3) * (logm(full) - L2)));
        },
        1, 512);

    const mat2c Pc = to_complex(P0), P2c = to_complex(out.P2);
    const double ref = std::max(1.0, op_norm(P0));
    out.identity_residual = sup_on_grid(
        [&](double x) {
            mat2c lhs = out.R_total.eval(wrap(x + alpha, 1)).adj() * (Pc + eps * Ptilde.eval(x)) * out.R_total.eval(x);
            mat2c rhs = P2c + e3 * out.Ptilde2.eval(x);
            return max_abs(lhs - rhs) / ref;
        },
        1, 1024);
    return out;
}

conjugacy build_frame(const vector_map& V, double min_norm, int samples) {
    const int per = V.period();
    std::vector<mat2c> rs(samples);
    double worst = INFINITY, where = 0;
    for (int j = 0; j < samples; ++j) {
        double x = static_cast<double>(per) * j / samples;
        vec2r v = real_part(V.eval(x));
        double n2 = v.x * v.x + v.y * v.y;
        if (std::sqrt(n2) < worst) worst = std::sqrt(n2), where = x;
        rs[j] = to_complex(mat2r{v.x, -v.y / n2, v.y, v.x / n2});
    }
    if (!(worst >= min_norm))
        throw numerical_error("build_frame", "|V| nearly vanishes (" + std::to_string(worst) + ") near x = " +
                                                 std::to_string(where));
    return make_conjugacy(compact(from_samples(rs, per, samples / 4, true)));
}

namespace {

// Real or imaginary part of a complex vector map, as a real-valued map.
vector_map part(const vector_map& u, bool imag) {
    const int n = u.band_limit();
    vector_map out(n, u.period(), true);
    for (int k = -n; k <= n; ++k) {
        vec2c a = u.coeff(k), b = detail::value_conj(u.coeff(-k));
        out.at(k) = imag ? cplx(0, -0.5) * (a - b) : 0.5 * (a + b);
    }
    out.set_tail(u.tail());
    return out;
}

} // namespace

reduction reduce_at_edge(const bloch_solution& sol, const frequency& freq, double lambda, const scalar_map& f,
                         const reduce_options& opt) {
    if (!sol.n_tilde) throw invalid_input("reduce_at_edge: Bloch solution carries no resonance");
    reduction red;
    red.energy = sol.eigenvalue;
    red.n_tilde = *sol.n_tilde;
    const long double alpha = freq.value;
    red.waves = assemble_U(sol, freq, lambda, f);

    vector_map re = part(red.waves.U_hat, false), im = part(red.waves.U_hat, true);
    const int n = static_cast<int>(red.n_tilde);
    red.criterion_real = 2 * vec_norm(re.coeff(n));
    red.criterion_imag = 2 * vec_norm(im.coeff(n));
    const double thr = opt.criterion_threshold * (1 - 1e-12);
    if (red.criterion_real < thr && red.criterion_imag < thr)
        throw numerical_error("reduce_at_edge", "neither real nor imaginary part passes the selection bound");
    red.choice = red.criterion_real >= red.criterion_imag ? 'R' : 'I';
    red.frame = build_frame(red.choice == 'R' ? re : im, 1e-8, opt.samples);

    auto c = cocycle::schrodinger(lambda, f, static_cast<double>(alpha), red.energy);
    const int M = opt.samples;
    std::vector<cplx> nu_s(M);
    double diag_mean = 0;
    for (int j = 0; j < M; ++j) {
        double x = static_cast<double>(j) / M;
        mat2c B = red.frame.R.eval(wrap(x + alpha, 2)).adj() * to_complex(c.at(x)) * red.frame.R.eval(x);
        nu_s[j] = B.b;
        diag_mean += 0.5 * (B.a + B.d).real();
    }
    diag_mean /= M;
    const int s = diag_mean >= 0 ? 1 : -1;
    red.nu = compact(from_samples(nu_s, 1, M / 4, true));
    red.P = {s, red.nu.coeff(0).real()};
    red.phi = solve_homological_scalar(red.nu, alpha, s, opt.divisor_cutoff);

    std::vector<mat2c> rs(M);
    for (int j = 0; j < M; ++j) {
        double x = 2.0 * j / M;
        mat2c r1 = red.frame.R.eval(x);
        cplx ph = red.phi.eval(wrap(x, 1));
        rs[j] = r1 * mat2c{1.0, ph.real(), 0.0, 1.0};
    }
    red.R = make_conjugacy(compact(from_samples(rs, 2, M / 4, true)));

    const mat2c Pm = to_complex(red.P.matrix());
    red.residual = sup_on_grid(
        [&](double x) {
            mat2c B = red.R.R.eval(wrap(x + alpha, 2)).adj() * to_complex(c.at(x)) * red.R.R.eval(x);
            return max_abs(B - Pm);
        },
        2, 2048);
    red.flagged = !(red.residual <= opt.residual_tolerance);

    const long l = opt.iterate_l;
    double acc = 0;
    const std::array<double, 3> xs{0.1, 0.37, 0.8};
    for (double x0 : xs) {
        auto t = transfer(c, l, x0);
        mat2c T = t.m * static_cast<double>(std::exp(t.log_scale));
        mat2c C = red.R.R.eval(wrap(x0 + static_cast<long double>(l) * alpha, 2)).adj() * T * red.R.R.eval(x0);
        double sl1 = (l - 1) % 2 == 0 ? 1.0 : static_cast<double>(s);
        acc += C.b.real() / (static_cast<double>(l) * sl1);
    }
    red.mu_iterate = acc / xs.size();
    red.mu_agreement = std::abs(red.mu_iterate - red.P.mu) / std::max(std::abs(red.P.mu), 1e-300);
    red.upper_edge_convention = red.P.sign * red.P.mu > 0;
    return red;
}

averages average_identities(const matrix_map& R, const parabolic_form& P, long double alpha, int grid) {
    averages av;
    const int per = R.period();
    const double s = P.sign, mu = P.mu;
    double defect = 0;
    for (int j = 0; j < grid; ++j) {
        double x = static_cast<double>(per) * j / grid;
        mat2r r = real_part(R.eval(x)), r1 = real_part(R.eval(wrap(x + alpha, per)));
        av.r11_sq += r.a * r.a;
        av.r11_r12 += r.a * r.b;
        av.r12_sq += r.b * r.b;
        av.r21_sq += r.c * r.c;
        av.r_norm = std::max(av.r_norm, op_norm(r));
        defect = std::max(defect, std::abs(r1.c - s * r.a));
        defect = std::max(defect, std::abs(r1.d - (s * r.b - mu * r.a)));
        defect = std::max(defect, std::abs(s * (r1.a * r.b - r1.b * r.a) - (1 + mu * r1.a * r.a)));
    }
    av.r11_sq /= grid;
    av.r11_r12 /= grid;
    av.r12_sq /= grid;
    av.r21_sq /= grid;
    av.shift_identity_defect = defect;
    const double scale = std::max(1.0, av.r_norm * av.r_norm);
    av.shift_identities = defect <= 1e-9 * scale;
    av.column_averages_equal = std::abs(av.r11_sq - av.r21_sq) <= 1e-9 * scale;
    av.lower_bound = av.r11_sq >= 1.0 / (2 * av.r_norm);
    av.wronskian = av.r11_sq * av.r12_sq - av.r11_r12 * av.r11_r12;
    av.wronskian_positive = av.wronskian > 0;
    return av;
}

matrix_map perturbation_matrix(const matrix_map& R, const parabolic_form& P, const cocycle* c, double probe,
                               int samples) {
    const int per = R.period();
    const double s = P.sign, mu = P.mu;
    std::vector<mat2c> ps(samples);
    for (int j = 0; j < samples; ++j) {
        double x = static_cast<double>(j) / samples;
        mat2r r = real_part(R.eval(x));
        double w = s * r.b - mu * r.a;
        ps[j] = to_complex(mat2r{w * r.a, w * r.b, -s * r.a * r.a, -s * r.a * r.b});
    }
    matrix_map Pt = compact(from_samples(ps, 1, samples / 4, true));
    if (c) {
        cocycle cp = *c;
        cp.energy += probe;
        const mat2c Pm = to_complex(P.matrix());
        double worst = 0, scale = 0;
        for (int j = 0; j < 1024; ++j) {
            double x = (j + 0.5) / 1024;
            mat2c lhs = R.eval(wrap(x + static_cast<long double>(c->alpha), per)).adj() * to_complex(cp.at(x)) * R.eval(x);
            mat2c rhs = Pm + probe * Pt.eval(x);
            worst = std::max(worst, max_abs(lhs - rhs));
            scale = std::max(scale, max_abs(lhs));
        }
        if (!(worst <= 1e-8 * scale))
            throw numerical_error("perturbation_matrix", "probe identity residual " + std::to_string(worst / scale) +
                                                             " exceeds 1e-8");
    }
    return Pt;
}

double gap_edge_epsilon(const averages& av, const parabolic_form& P) {
    if (P.collapsed()) return 0.0;
    double den = av.r11_sq * av.r12_sq - av.r11_r12 * av.r11_r12;
    if (!(den > 0)) throw numerical_error("gap_edge_epsilon", "nonpositive determinant of averages");
    return -2 * P.normalized_mu() * av.r11_sq / den;
}

elliptic_form elliptic_normalize(const mat2r& D) {
    double delta = D.det();
    if (std::abs(D.trace()) > 1e-12 * std::max(1.0, max_abs(D)))
        throw invalid_input("elliptic_normalize: matrix is not trace-free");
    if (!(delta > 0)) throw invalid_input("elliptic_normalize: determinant must be positive");
    if (!(D.b < 0)) throw invalid_input("elliptic_normalize: upper-right entry must be negative");
    double q4 = std::pow(delta, 0.25), r = std::sqrt(-D.b);
    return {{0.0, r / q4, -q4 / r, D.a / (q4 * r)}, std::sqrt(delta)};
}

rotation_shift rotation_shift_check(double e_edge, double eps, const frequency& freq, double lambda,
                                    const scalar_map& f, long iterations) {
    rotation_shift out;
    const double alpha = freq.alpha();
    auto a = rotation_number(cocycle::schrodinger(lambda, f, alpha, e_edge), iterations, 0.0);
    out.rho_edge = a.rho;
    out.error_edge = a.error;
    if (eps == 0.0) {
        out.rho_shifted = a.rho;
        out.error_shifted = a.error;
        return out;
    }
    auto b = rotation_number(cocycle::schrodinger(lambda, f, alpha, e_edge + eps), iterations, 0.0);
    out.rho_shifted = b.rho;
    out.error_shifted = b.error;
    out.differs = std::abs(a.rho - b.rho) > a.error + b.error;
    double slack = a.error + b.error;
    out.monotone = eps < 0 ? b.rho >= a.rho - slack : b.rho <= a.rho + slack;
    return out;
}

int composed_degree(const matrix_map& R, const matrix_map& R1, const matrix_map& R2, int samples) {
    std::vector<mat2c> rs(samples);
    for (int j = 0; j < samples; ++j) {
        double x = 2.0 * j / samples;
        double y = wrap(x, 1);
        rs[j] = R.eval(x) * R1.eval(y) * R2.eval(y);
    }
    return degree_of(from_samples(rs, 2, samples / 4, true));
}

} // namespace qps
