#include "qps/kernels.hpp"

#include <cmath>

namespace qps::kernels::scalar {

namespace {

const double scale_down = std::ldexp(1.0, -scale_exponent);
const double scale_limit = std::ldexp(1.0, scale_exponent);

} // namespace

void discriminant_batch(std::span<const double> potential, std::span<const double> energies,
                        std::span<double> trace, std::span<int> scalings) {
    const std::size_t q = potential.size();
    for (std::size_t i = 0; i < energies.size(); ++i) {
        const double e = energies[i];
        double r00 = 1, r01 = 0, r10 = 0, r11 = 1;
        int count = 0;
        for (std::size_t n = 0; n < q; ++n) {
            double t = e - potential[n];
            double n00 = t * r00 - r10;
            double n01 = t * r01 - r11;
            r10 = r00;
            r11 = r01;
            r00 = n00;
            r01 = n01;
            if ((n & 15) == 15 || n + 1 == q) {
                double m = std::fmax(std::fmax(std::fabs(r00), std::fabs(r01)),
                                     std::fmax(std::fabs(r10), std::fabs(r11)));
                if (m > scale_limit) {
                    r00 *= scale_down;
                    r01 *= scale_down;
                    r10 *= scale_down;
                    r11 *= scale_down;
                    ++count;
                }
            }
        }
        trace[i] = r00 + r11;
        scalings[i] = count;
    }
}

void sturm_count_batch(std::span<const double> diag, std::span<const double> offdiag_sq,
                       std::span<const double> shifts, std::span<int> counts) {
    const std::size_t n = diag.size();
    for (std::size_t j = 0; j < shifts.size(); ++j) {
        const double x = shifts[j];
        int neg = 0;
        double p = diag[0] - x;
        if (std::fabs(p) < pivot_floor) p = -pivot_floor;
        if (p < 0) ++neg;
        for (std::size_t i = 1; i < n; ++i) {
            double t = diag[i] - x;
            p = t - offdiag_sq[i - 1] / p;
            if (std::fabs(p) < pivot_floor) p = -pivot_floor;
            if (p < 0) ++neg;
        }
        counts[j] = neg;
    }
}

} // namespace qps::kernels::scalar
