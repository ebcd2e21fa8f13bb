#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

namespace qps {

using cplx = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double pi = 3.141592653589793238462643383280;

template <class T>
struct vec2 {
    T x{}, y{};

    vec2& operator+=(const vec2& o) { x += o.x; y += o.y; return *this; }
    vec2& operator-=(const vec2& o) { x -= o.x; y -= o.y; return *this; }
    friend vec2 operator+(vec2 a, const vec2& b) { return a += b; }
    friend vec2 operator-(vec2 a, const vec2& b) { return a -= b; }
    friend vec2 operator*(const T& s, const vec2& v) { return {s * v.x, s * v.y}; }
    friend vec2 operator*(const vec2& v, const T& s) { return {s * v.x, s * v.y}; }
    friend bool operator==(const vec2&, const vec2&) = default;
};

/// Row-major 2x2 matrix [[a, b], [c, d]].
template <class T>
struct mat2 {
    T a{}, b{}, c{}, d{};

    static mat2 identity() { return {T(1), T(0), T(0), T(1)}; }
    static mat2 zero() { return {}; }

    T det() const { return a * d - b * c; }
    T trace() const { return a + d; }
    /// Adjugate; equals the inverse when det = 1.
    mat2 adj() const { return {d, -b, -c, a}; }
    mat2 inverse() const {
        T inv = T(1) / det();
        return {d * inv, -b * inv, -c * inv, a * inv};
    }
    mat2 transpose() const { return {a, c, b, d}; }

    mat2& operator+=(const mat2& o) { a += o.a; b += o.b; c += o.c; d += o.d; return *this; }
    mat2& operator-=(const mat2& o) { a -= o.a; b -= o.b; c -= o.c; d -= o.d; return *this; }
    mat2& operator*=(const T& s) { a *= s; b *= s; c *= s; d *= s; return *this; }
    friend mat2 operator+(mat2 x, const mat2& y) { return x += y; }
    friend mat2 operator-(mat2 x, const mat2& y) { return x -= y; }
    friend mat2 operator-(const mat2& x) { return {-x.a, -x.b, -x.c, -x.d}; }
    friend mat2 operator*(mat2 x, const T& s) { return x *= s; }
    friend mat2 operator*(const T& s, mat2 x) { return x *= s; }
    friend mat2 operator*(const mat2& x, const mat2& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    friend vec2<T> operator*(const mat2& m, const vec2<T>& v) {
        return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
    }
    friend bool operator==(const mat2&, const mat2&) = default;
};

using mat2r = mat2<double>;
using mat2c = mat2<cplx>;
using vec2r = vec2<double>;
using vec2c = vec2<cplx>;

inline mat2c to_complex(const mat2r& m) { return {m.a, m.b, m.c, m.d}; }
inline mat2r real_part(const mat2c& m) { return {m.a.real(), m.b.real(), m.c.real(), m.d.real()}; }
inline vec2r real_part(const vec2c& v) { return {v.x.real(), v.y.real()}; }
inline vec2r imag_part(const vec2c& v) { return {v.x.imag(), v.y.imag()}; }

/// Rotation by angle 2*pi*t.
inline mat2r rotation(double t) {
    double c = std::cos(two_pi * t), s = std::sin(two_pi * t);
    return {c, -s, s, c};
}

/// Largest singular value of a 2x2 matrix.
template <class T>
double op_norm(const mat2<T>& m) {
    double f = std::norm(cplx(m.a)) + std::norm(cplx(m.b)) + std::norm(cplx(m.c)) + std::norm(cplx(m.d));
    double dt = std::abs(cplx(m.det()));
    double disc = std::max(0.0, f * f - 4.0 * dt * dt);
    return std::sqrt(0.5 * (f + std::sqrt(disc)));
}

template <class T>
double vec_norm(const vec2<T>& v) {
    return std::sqrt(std::norm(cplx(v.x)) + std::norm(cplx(v.y)));
}

/// Largest entry modulus; cheap proxy used for renormalization.
template <class T>
double max_abs(const mat2<T>& m) {
    using std::abs;
    return std::max(std::max(abs(m.a), abs(m.b)), std::max(abs(m.c), abs(m.d)));
}

/// Closed-form exponential of a 2x2 matrix (Cayley-Hamilton).
mat2c expm(const mat2c& m);
mat2r expm(const mat2r& m);

/// Principal logarithm of a real 2x2 matrix with positive determinant.
/// Throws numerical_error when the eigenvalues leave the principal branch (trace <= -2 sqrt(det)).
mat2r logm(const mat2r& m);

} // namespace qps
