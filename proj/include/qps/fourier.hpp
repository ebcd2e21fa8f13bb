#pragma once

#include "qps/errors.hpp"
#include "qps/linalg.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace qps {

namespace detail {

inline double value_norm(const cplx& v) { return std::abs(v); }
inline double value_norm(const vec2c& v) { return vec_norm(v); }
inline double value_norm(const mat2c& v) { return op_norm(v); }

inline cplx value_conj(const cplx& v) { return std::conj(v); }
inline vec2c value_conj(const vec2c& v) { return {std::conj(v.x), std::conj(v.y)}; }
inline mat2c value_conj(const mat2c& v) { return {std::conj(v.a), std::conj(v.b), std::conj(v.c), std::conj(v.d)}; }

inline void append_parts(std::vector<cplx>& out, const cplx& v) { out.push_back(v); }
inline void append_parts(std::vector<cplx>& out, const vec2c& v) { out.push_back(v.x); out.push_back(v.y); }
inline void append_parts(std::vector<cplx>& out, const mat2c& v) {
    out.push_back(v.a); out.push_back(v.b); out.push_back(v.c); out.push_back(v.d);
}

} // namespace detail

/// Global knobs for Fourier evaluation.
struct fourier_config {
    int default_band_limit = 512;
    /// Largest |Im z| at which maps are evaluated.
    double max_strip = 0.5;
    /// Absolute tolerance on the propagated truncation tail during evaluation.
    double eval_tolerance = 1e-6;
};
fourier_config& fourier_settings();

/// Truncated Fourier series sum_{|k|<=N} c_k e^{2 pi i k z / period}.
template <class V>
class fourier_map {
public:
    fourier_map() : coeffs_(1) {}
    explicit fourier_map(int band_limit, int period = 1, bool real = true)
        : n_(band_limit), period_(period), real_(real), coeffs_(2 * band_limit + 1) {
        if (band_limit < 0) throw invalid_input("fourier_map: negative band limit");
        if (period != 1 && period != 2) throw invalid_input("fourier_map: period must be 1 or 2");
    }

    static fourier_map constant(const V& v, int period = 1, bool real = true) {
        fourier_map m(0, period, real);
        m.at(0) = v;
        return m;
    }

    int band_limit() const { return n_; }
    int period() const { return period_; }
    bool real_valued() const { return real_; }
    void set_real(bool r) { real_ = r; }
    /// Accumulated sup-norm bound of coefficients dropped by truncation.
    double tail() const { return tail_; }
    void set_tail(double t) { tail_ = t; }

    V coeff(int k) const { return (k < -n_ || k > n_) ? V{} : coeffs_[k + n_]; }
    V& at(int k) {
        if (k < -n_ || k > n_) throw invalid_input("fourier_map: coefficient index out of range");
        return coeffs_[k + n_];
    }
    const std::vector<V>& coefficients() const { return coeffs_; }

    /// Sum of coefficient norms; bounds the sup over the real axis.
    double l1_norm() const {
        double s = 0;
        for (const auto& c : coeffs_) s += detail::value_norm(c);
        return s;
    }

    V eval(cplx z) const {
        double y = std::abs(z.imag());
        const auto& cfg = fourier_settings();
        if (y > cfg.max_strip + 1e-15)
            throw strip_error("fourier_map: |Im z| beyond the configured strip", INFINITY);
        double growth = std::exp(two_pi * n_ * y / period_);
        if (!std::isfinite(growth)) throw strip_error("fourier_map: strip weight overflows", INFINITY);
        double tail_bound = tail_ * growth;
        if (tail_bound > cfg.eval_tolerance)
            throw strip_error("fourier_map: truncation tail exceeds tolerance in strip", tail_bound);
        cplx w = std::exp(cplx(0, two_pi / period_) * z);
        cplx wi = 1.0 / w;
        V sum = coeffs_[n_];
        cplx wp = 1.0, wm = 1.0;
        for (int k = 1; k <= n_; ++k) {
            wp *= w;
            wm *= wi;
            sum += wp * coeffs_[n_ + k];
            sum += wm * coeffs_[n_ - k];
        }
        return sum;
    }
    V eval(double x) const { return eval(cplx(x, 0)); }

    /// Drop coefficients with |k| > limit, accumulating their norms into the tail.
    fourier_map truncated(int limit) const {
        if (limit >= n_) return *this;
        fourier_map out(limit, period_, real_);
        out.tail_ = tail_;
        for (int k = -n_; k <= n_; ++k) {
            if (std::abs(k) <= limit) out.at(k) = coeff(k);
            else out.tail_ += detail::value_norm(coeff(k));
        }
        return out;
    }

    /// Maximum deviation from coeff(-k) = conj(coeff(k)), relative to the largest coefficient.
    double reality_defect() const {
        double scale = 0, worst = 0;
        for (int k = -n_; k <= n_; ++k) scale = std::max(scale, detail::value_norm(coeff(k)));
        for (int k = 0; k <= n_; ++k)
            worst = std::max(worst, detail::value_norm(coeff(-k) - detail::value_conj(coeff(k))));
        return scale > 0 ? worst / scale : 0.0;
    }

private:
    int n_ = 0;
    int period_ = 1;
    bool real_ = true;
    double tail_ = 0;
    std::vector<V> coeffs_;
};

using scalar_map = fourier_map<cplx>;
using vector_map = fourier_map<vec2c>;
using matrix_map = fourier_map<mat2c>;

template <class V>
void require_same_period(const fourier_map<V>& a, const fourier_map<V>& b) {
    if (a.period() != b.period()) throw period_mismatch("fourier_map: operands have different periods");
}

template <class V>
fourier_map<V> add(const fourier_map<V>& a, const fourier_map<V>& b) {
    require_same_period(a, b);
    int n = std::max(a.band_limit(), b.band_limit());
    fourier_map<V> out(n, a.period(), a.real_valued() && b.real_valued());
    for (int k = -n; k <= n; ++k) out.at(k) = a.coeff(k) + b.coeff(k);
    out.set_tail(a.tail() + b.tail());
    return out;
}

template <class V>
fourier_map<V> sub(const fourier_map<V>& a, const fourier_map<V>& b) {
    require_same_period(a, b);
    int n = std::max(a.band_limit(), b.band_limit());
    fourier_map<V> out(n, a.period(), a.real_valued() && b.real_valued());
    for (int k = -n; k <= n; ++k) out.at(k) = a.coeff(k) - b.coeff(k);
    out.set_tail(a.tail() + b.tail());
    return out;
}

template <class V>
fourier_map<V> scale(const fourier_map<V>& a, cplx s) {
    fourier_map<V> out(a.band_limit(), a.period(), a.real_valued() && s.imag() == 0.0);
    for (int k = -a.band_limit(); k <= a.band_limit(); ++k) out.at(k) = s * a.coeff(k);
    out.set_tail(std::abs(s) * a.tail());
    return out;
}

/// Product of two maps, truncated to `limit` (default: configured band limit) with the dropped
/// mass added to the tail.
template <class A, class B>
auto mul(const fourier_map<A>& a, const fourier_map<B>& b, int limit = -1) {
    using R = decltype(A{} * B{});
    if (a.period() != b.period()) throw period_mismatch("fourier_map: operands have different periods");
    if (limit < 0) limit = fourier_settings().default_band_limit;
    int full = a.band_limit() + b.band_limit();
    int n = std::min(full, limit);
    fourier_map<R> out(n, a.period(), a.real_valued() && b.real_valued());
    double dropped = 0;
    std::vector<R> acc(2 * full + 1);
    for (int i = -a.band_limit(); i <= a.band_limit(); ++i) {
        A ai = a.coeff(i);
        for (int j = -b.band_limit(); j <= b.band_limit(); ++j) acc[i + j + full] += ai * b.coeff(j);
    }
    for (int k = -full; k <= full; ++k) {
        if (std::abs(k) <= n) out.at(k) = acc[k + full];
        else dropped += detail::value_norm(acc[k + full]);
    }
    out.set_tail(dropped + a.tail() * b.l1_norm() + b.tail() * a.l1_norm() + a.tail() * b.tail());
    return out;
}

/// x -> m(x + alpha): coeff(k) picks up e^{2 pi i k alpha / period}.
template <class V>
fourier_map<V> shift(const fourier_map<V>& m, double alpha) {
    fourier_map<V> out(m.band_limit(), m.period(), m.real_valued());
    for (int k = -m.band_limit(); k <= m.band_limit(); ++k)
        out.at(k) = std::exp(cplx(0, two_pi * k * alpha / m.period())) * m.coeff(k);
    out.set_tail(m.tail());
    return out;
}

template <class V>
V average(const fourier_map<V>& m) { return m.coeff(0); }

/// Coefficients of a map from M equispaced samples v_j = m(period * j / M), |k| <= band_limit.
/// The tail is set to the coefficient mass in the outer eighth of the band, an aliasing proxy.
template <class V>
fourier_map<V> from_samples(const std::vector<V>& samples, int period, int band_limit, bool real) {
    const int m = static_cast<int>(samples.size());
    if (2 * band_limit + 1 > m) throw invalid_input("from_samples: band limit too large for sample count");
    std::vector<cplx> tw(m);
    for (int j = 0; j < m; ++j) tw[j] = std::exp(cplx(0, -two_pi * j / m));
    fourier_map<V> out(band_limit, period, real);
    for (int k = -band_limit; k <= band_limit; ++k) {
        V acc{};
        int step = ((k % m) + m) % m;
        int idx = 0;
        for (int j = 0; j < m; ++j) {
            acc += tw[idx] * samples[j];
            idx += step;
            if (idx >= m) idx -= m;
        }
        out.at(k) = (1.0 / m) * acc;
    }
    if (real) {
        for (int k = 1; k <= band_limit; ++k) {
            V s = 0.5 * (out.coeff(k) + detail::value_conj(out.coeff(-k)));
            out.at(k) = s;
            out.at(-k) = detail::value_conj(s);
        }
        out.at(0) = 0.5 * (out.coeff(0) + detail::value_conj(out.coeff(0)));
    }
    double t = 0;
    int outer = band_limit - band_limit / 8;
    for (int k = -band_limit; k <= band_limit; ++k)
        if (std::abs(k) > outer) t += detail::value_norm(out.coeff(k));
    out.set_tail(t);
    return out;
}

/// Sample a callable on M equispaced points of one period.
template <class F>
auto sample(F&& fn, int period, int m) {
    using V = decltype(fn(0.0));
    std::vector<V> out(m);
    for (int j = 0; j < m; ++j) out[j] = fn(static_cast<double>(period) * j / m);
    return out;
}

struct strip_norm_report {
    double delta = 0;
    double value = 0;
    int grid = 0;
};

/// Sup of |map| over the boundary lines Im z = +-delta, with the grid doubled from
/// `grid` until the value changes by less than 1e-10 relative.
template <class V>
strip_norm_report strip_norm(const fourier_map<V>& m, double delta, int grid = 2048) {
    auto sup_on = [&](int g) {
        double best = 0;
        for (int j = 0; j < g; ++j) {
            double x = static_cast<double>(m.period()) * j / g;
            best = std::max(best, detail::value_norm(m.eval(cplx(x, delta))));
            if (delta != 0.0) best = std::max(best, detail::value_norm(m.eval(cplx(x, -delta))));
        }
        return best;
    };
    int g = std::max(grid, 8);
    double v = sup_on(g);
    for (int iter = 0; iter < 6; ++iter) {
        double v2 = sup_on(2 * g);
        g *= 2;
        bool done = std::abs(v2 - v) <= 1e-10 * std::max(v2, 1e-300);
        v = std::max(v, v2);
        if (done) break;
    }
    return {delta, v, g};
}

/// Text dump: one line per k, `k re im` for scalars and all entries for vectors/matrices, hex floats.
template <class V>
std::string dump(const fourier_map<V>& m) {
    std::string out;
    char buf[64];
    for (int k = -m.band_limit(); k <= m.band_limit(); ++k) {
        std::vector<cplx> parts;
        detail::append_parts(parts, m.coeff(k));
        out += std::to_string(k);
        for (const auto& p : parts) {
            std::snprintf(buf, sizeof buf, " %a %a", p.real(), p.imag());
            out += buf;
        }
        out += '\n';
    }
    return out;
}

/// Real trigonometric polynomial sum_k c_k e^{2 pi i k x} from its nonnegative-k coefficients
/// (negative modes filled by conjugation).
scalar_map real_trig(const std::vector<cplx>& nonneg_coeffs);
/// 2 cos(2 pi x), the almost Mathieu potential.
scalar_map cosine_potential();

} // namespace qps
