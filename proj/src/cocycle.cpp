#include "qps/cocycle.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace qps {

namespace {

constexpr int renorm_every = 32;

double bump(double t) { return (t <= 0.0 || t >= 1.0) ? 0.0 : std::exp(-1.0 / (t * (1.0 - t))); }

// Evaluates a real trigonometric polynomial along an orbit x0 + n*alpha, updating the phase
// multiplicatively and re-anchoring it periodically.
class orbit_potential {
public:
    orbit_potential(const scalar_map& f, long double x0, long double alpha)
        : f_(f), x0_(x0), alpha_(alpha), step_(std::exp(cplx(0, two_pi * static_cast<double>(alpha)))) {
        anchor(0);
    }

    double value(long n) {
        if (n - anchor_n_ >= 256 || n < anchor_n_) anchor(n);
        else
            while (cur_n_ < n) {
                w_ *= step_;
                ++cur_n_;
            }
        int nb = f_.band_limit();
        cplx s = f_.coeff(0);
        cplx wp = 1.0;
        for (int k = 1; k <= nb; ++k) {
            wp *= w_;
            s += f_.coeff(k) * wp + f_.coeff(-k) * std::conj(wp);
        }
        return s.real();
    }

private:
    void anchor(long n) {
        long double x = x0_ + static_cast<long double>(n) * alpha_;
        x -= std::floor(x);
        w_ = std::exp(cplx(0, two_pi * static_cast<double>(x)));
        anchor_n_ = cur_n_ = n;
    }

    const scalar_map& f_;
    long double x0_, alpha_;
    cplx step_;
    cplx w_;
    long anchor_n_ = 0, cur_n_ = 0;
};

// Continuous lift of the first-column angle of a general cocycle over one period.
class column_lift {
public:
    column_lift(const cocycle& c, int grid) : grid_(grid), lifted_(grid + 1) {
        double prev = 0;
        for (int j = 0; j <= grid; ++j) {
            mat2r a = c.at(static_cast<double>(j) / grid);
            double raw = std::atan2(a.c, a.a);
            if (j == 0) lifted_[0] = raw;
            else lifted_[j] = prev + std::remainder(raw - prev, two_pi);
            prev = lifted_[j];
        }
        if (std::abs(lifted_[grid] - lifted_[0]) > 1.0)
            throw invalid_input("rotation_number: cocycle is not homotopic to the identity");
    }

    double angle(double x, double raw) const {
        double t = x - std::floor(x);
        int j = static_cast<int>(std::lround(t * grid_));
        double ref = lifted_[std::min(j, grid_)];
        return raw + two_pi * std::round((ref - raw) / two_pi);
    }

private:
    int grid_;
    std::vector<double> lifted_;
};

// Angle increment of v -> A v under the Iwasawa lift; updates v to the unit image.
double lifted_step(const mat2r& a, double theta, vec2r& v) {
    vec2r w = a * v;
    double ct = std::cos(theta), st = std::sin(theta);
    // R_{-theta} w
    double ux = ct * w.x + st * w.y;
    double uy = -st * w.x + ct * w.y;
    double inc = theta + std::atan2(v.x * uy - v.y * ux, v.x * ux + v.y * uy);
    double nw = std::hypot(w.x, w.y);
    v = {w.x / nw, w.y / nw};
    return inc;
}

struct step_source {
    const cocycle& c;
    long double x0;
    long double alpha;
    std::optional<orbit_potential> pot;
    std::optional<column_lift> lift;

    step_source(const cocycle& cc, long double x, int lift_grid) : c(cc), x0(x) {
        alpha = cc.q > 0 ? static_cast<long double>(cc.p) / static_cast<long double>(cc.q)
                         : static_cast<long double>(cc.alpha);
        if (c.is_schrodinger) pot.emplace(c.potential, x0, alpha);
        else lift.emplace(c, lift_grid);
    }

    double step(long n, vec2r& v) {
        if (c.is_schrodinger) {
            double a = c.energy - c.lambda * pot->value(n);
            mat2r m{a, -1.0, 1.0, 0.0};
            return lifted_step(m, std::atan2(1.0, a), v);
        }
        long double x = x0 + static_cast<long double>(n) * alpha;
        x -= std::floor(x);
        mat2r m = c.at(static_cast<double>(x));
        double theta = lift->angle(static_cast<double>(x), std::atan2(m.c, m.a));
        return lifted_step(m, theta, v);
    }
};

rotation_result finish(const cocycle& c, rotation_result r, const rotation_options& opt) {
    if (c.is_schrodinger) r.rho = std::clamp(r.rho, 0.0, 0.5);
    r.converged = r.error <= opt.tolerance;
    return r;
}

// Exact evaluation along a periodic orbit when the period product is not elliptic.
std::optional<rotation_result> periodic_rotation(const cocycle& c, const rotation_options& opt) {
    const long q = static_cast<long>(c.q);
    auto tr = transfer(c, q, cplx(opt.x0, 0));
    mat2r m = real_part(tr.m);
    double t = m.trace();
    double det = std::exp(-2.0 * static_cast<double>(tr.log_scale));
    double disc = t * t - 4.0 * det;
    if (disc < 0) return std::nullopt;
    double l = 0.5 * (t + std::copysign(std::sqrt(disc), t));
    vec2r v1{m.b, l - m.a}, v2{l - m.d, m.c};
    vec2r v = vec_norm(v1) >= vec_norm(v2) ? v1 : v2;
    double nv = vec_norm(v);
    if (!(nv > 0)) {
        // m is a multiple of the identity: any direction is invariant
        v = {1.0, 0.0};
        nv = 1.0;
    }
    v = {v.x / nv, v.y / nv};
    step_source src(c, opt.x0, opt.lift_grid);
    double total = 0;
    for (long n = 0; n < q; ++n) total += src.step(n, v);
    double k = std::round(total / pi);
    rotation_result r;
    r.rho = k / (2.0 * static_cast<double>(q));
    r.error = std::abs(total - k * pi) / (two_pi * static_cast<double>(q));
    r.iterations = q;
    r.method = "periodic";
    if (r.error > 1e-6) return std::nullopt;
    r.error += 1e-15;
    return r;
}

} // namespace

cocycle cocycle::schrodinger(double lambda, const scalar_map& f, double alpha, double energy) {
    cocycle c;
    c.alpha = alpha;
    c.is_schrodinger = true;
    c.lambda = lambda;
    c.potential = f;
    c.energy = energy;
    return c;
}

cocycle cocycle::schrodinger_rational(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q,
                                      double energy) {
    if (q <= 0) throw invalid_input("schrodinger_rational: q must be positive");
    cocycle c = schrodinger(lambda, f, static_cast<double>(p) / static_cast<double>(q), energy);
    c.p = p;
    c.q = q;
    return c;
}

cocycle cocycle::general(const matrix_map& a, double alpha) {
    cocycle c;
    c.alpha = alpha;
    c.map = a;
    return c;
}

mat2c cocycle::at(cplx x) const {
    if (is_schrodinger) return {energy - lambda * potential.eval(x), -1.0, 1.0, 0.0};
    return map.eval(x);
}

mat2r cocycle::at(double x) const {
    if (is_schrodinger) return {energy - lambda * potential.eval(x).real(), -1.0, 1.0, 0.0};
    return real_part(map.eval(x));
}

double cocycle::reliable_strip() const { return fourier_settings().max_strip; }

transfer_result transfer(const cocycle& c, long k, cplx x) {
    if (k < 1) throw invalid_input("transfer: k must be at least 1");
    long double step = c.q > 0 ? static_cast<long double>(c.p) / static_cast<long double>(c.q)
                               : static_cast<long double>(c.alpha);
    transfer_result r{c.at(x), 0};
    for (long l = 1; l < k; ++l) {
        long double xr = static_cast<long double>(x.real()) + static_cast<long double>(l) * step;
        xr -= std::floor(xr);
        r.m = c.at(cplx(static_cast<double>(xr), x.imag())) * r.m;
        if (l % renorm_every == 0) {
            double s = max_abs(r.m);
            if (s > 0) {
                r.m *= 1.0 / s;
                r.log_scale += std::log(static_cast<long double>(s));
            }
        }
    }
    return r;
}

double lyapunov(const cocycle& c, long k, int phases) {
    if (k < 1 || phases < 1) throw invalid_input("lyapunov: k and phases must be positive");
    long double acc = 0;
    for (int j = 0; j < phases; ++j) {
        auto t = transfer(c, k, cplx(static_cast<double>(j) / phases, 0));
        acc += std::log(static_cast<long double>(op_norm(t.m))) + t.log_scale;
    }
    return static_cast<double>(acc / (static_cast<long double>(phases) * k));
}

rotation_result rotation_number(const cocycle& c, long iterations, double x0) {
    rotation_options opt;
    opt.iterations = iterations;
    opt.x0 = x0;
    return rotation_number(c, opt);
}

rotation_result rotation_number(const cocycle& c, const rotation_options& opt) {
    if (opt.iterations < 16) throw invalid_input("rotation_number: too few iterations");
    if (c.q > 0)
        if (auto r = periodic_rotation(c, opt)) return finish(c, *r, opt);

    const long n = opt.iterations - (opt.iterations % 2);
    const long half = n / 2;
    step_source src(c, opt.x0, opt.lift_grid);
    vec2r v{std::cos(0.3), std::sin(0.3)};
    long double s_all = 0, w_all = 0, s_a = 0, w_a = 0, s_b = 0, w_b = 0;
    for (long i = 0; i < n; ++i) {
        double inc = src.step(i, v);
        double wf = bump((i + 0.5) / n);
        s_all += wf * inc;
        w_all += wf;
        if (i < half) {
            double wh = bump((i + 0.5) / half);
            s_a += wh * inc;
            w_a += wh;
        } else {
            double wh = bump((i - half + 0.5) / half);
            s_b += wh * inc;
            w_b += wh;
        }
    }
    rotation_result r;
    r.rho = static_cast<double>(s_all / w_all) / two_pi;
    double ha = static_cast<double>(s_a / w_a) / two_pi;
    double hb = static_cast<double>(s_b / w_b) / two_pi;
    r.error = std::abs(ha - hb) + 1e-14;
    r.iterations = n;
    r.method = "birkhoff";
    return finish(c, r, opt);
}

int degree_of(const matrix_map& R) {
    static const double probe_angles[] = {0.37, 1.21, 2.53, 0.91};
    for (double ang : probe_angles) {
        vec2c v{std::cos(ang), std::sin(ang)};
        bool degenerate = false;
        for (int g = 4096; g <= (1 << 20); g *= 4) {
            double total = 0, prev = 0;
            bool coarse = false;
            for (int j = 0; j <= g && !degenerate && !coarse; ++j) {
                vec2r w = real_part(R.eval(static_cast<double>(j) / g) * v);
                if (std::hypot(w.x, w.y) < 1e-10) degenerate = true;
                double a = std::atan2(w.y, w.x);
                if (j > 0) {
                    double d = std::remainder(a - prev, pi);
                    if (std::abs(d) > pi / 4) coarse = true;
                    total += d;
                }
                prev = a;
            }
            if (degenerate) break;
            if (coarse) continue;
            double k = total / pi;
            if (std::abs(k - std::round(k)) > 1e-6)
                throw numerical_error("degree_of", "winding does not close over one period");
            return static_cast<int>(std::lround(k));
        }
        if (!degenerate) throw numerical_error("degree_of", "direction field unresolved at finest grid");
    }
    throw numerical_error("degree_of", "direction passes near zero for every probe vector");
}

conjugacy make_conjugacy(const matrix_map& R) { return {R, degree_of(R)}; }

cocycle conjugate(const cocycle& c, const conjugacy& Rc, int samples) {
    const auto& R = Rc.R;
    int na = c.is_schrodinger ? c.potential.band_limit() : c.map.band_limit();
    int nr = (R.band_limit() + R.period() - 1) / R.period();
    int nb = na + 2 * nr;
    int m = samples;
    if (m <= 0) {
        m = 256;
        while (m < 4 * (nb + 1)) m *= 2;
    }
    int band = std::min(nb, m / 2 - 1);
    std::vector<mat2c> vals(m);
    for (int j = 0; j < m; ++j) {
        double x = static_cast<double>(j) / m;
        mat2c r0 = R.eval(x);
        mat2c r1 = R.eval(x + c.alpha);
        double scale = op_norm(r1);
        if (std::abs(r1.det()) < 1e-10 * scale * scale)
            throw numerical_error("conjugate", "conjugacy nearly singular at x = " + std::to_string(x + c.alpha));
        vals[j] = r1.inverse() * c.at(cplx(x, 0)) * r0;
    }
    return cocycle::general(from_samples(vals, 1, band, true), c.alpha);
}

std::vector<strip_growth_point> strip_growth(const cocycle& c, double eta, long K, int grid) {
    if (K < 1) throw invalid_input("strip_growth: K must be positive");
    std::vector<long> schedule;
    for (long k = 1; k <= K; k *= 2) schedule.push_back(k);
    if (schedule.back() != K) schedule.push_back(K);
    std::vector<double> best(schedule.size(), -INFINITY);
    std::vector<double> lines = eta == 0.0 ? std::vector<double>{0.0} : std::vector<double>{eta, -eta};
    long double step = c.q > 0 ? static_cast<long double>(c.p) / c.q : static_cast<long double>(c.alpha);
    for (double y : lines) {
        for (int j = 0; j < grid; ++j) {
            long double x0 = static_cast<long double>(j) / grid;
            mat2c m = mat2c::identity();
            long double ls = 0;
            std::size_t next = 0;
            for (long k = 1; k <= K; ++k) {
                long double xr = x0 + static_cast<long double>(k - 1) * step;
                xr -= std::floor(xr);
                m = c.at(cplx(static_cast<double>(xr), y)) * m;
                if (k % renorm_every == 0) {
                    double s = max_abs(m);
                    m *= 1.0 / s;
                    ls += std::log(static_cast<long double>(s));
                }
                if (k == schedule[next]) {
                    double ln = static_cast<double>(std::log(static_cast<long double>(op_norm(m))) + ls);
                    best[next] = std::max(best[next], ln);
                    ++next;
                }
            }
        }
    }
    std::vector<strip_growth_point> out;
    for (std::size_t i = 0; i < schedule.size(); ++i)
        out.push_back({schedule[i], std::exp(best[i]), best[i]});
    return out;
}

} // namespace qps
