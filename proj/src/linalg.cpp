#include "qps/linalg.hpp"
#include "qps/errors.hpp"

namespace qps {

namespace {

// sinh(r)/r and cosh(r) for r^2 = d, with a series near zero.
void hyperbolic_pair(cplx d, cplx& ch, cplx& shr) {
    if (std::abs(d) < 1e-6) {
        ch = 1.0 + d / 2.0 + d * d / 24.0;
        shr = 1.0 + d / 6.0 + d * d / 120.0;
        return;
    }
    cplx r = std::sqrt(d);
    ch = std::cosh(r);
    shr = std::sinh(r) / r;
}

} // namespace

mat2c expm(const mat2c& m) {
    cplx t = m.trace() / 2.0;
    mat2c b = m - mat2c::identity() * t;
    cplx d = -b.det(); // b^2 = d I
    cplx ch, shr;
    hyperbolic_pair(d, ch, shr);
    mat2c out = mat2c::identity() * ch + b * shr;
    return out * std::exp(t);
}

mat2r expm(const mat2r& m) { return real_part(expm(to_complex(m))); }

mat2r logm(const mat2r& m) {
    double det = m.det();
    if (!(det > 0.0)) throw numerical_error("logm", "determinant not positive");
    double s = std::sqrt(det);
    mat2r n = m * (1.0 / s);
    double c = n.trace() / 2.0;
    if (!(c > -1.0 + 1e-12)) throw numerical_error("logm", "argument outside the principal branch");
    double u = c - 1.0;
    double factor;
    if (std::abs(u) < 1e-5) {
        factor = 1.0 - u / 3.0 + 2.0 * u * u / 15.0;
    } else if (c > 1.0) {
        double r = std::acosh(c);
        factor = r / std::sinh(r);
    } else {
        double r = std::acos(c);
        factor = r / std::sin(r);
    }
    mat2r out = (n - mat2r::identity() * c) * factor;
    double l = std::log(s);
    out.a += l;
    out.d += l;
    return out;
}

} // namespace qps
