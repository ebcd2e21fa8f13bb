#include "qps/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace qps::kernels {

namespace {

backend detect() {
    const char* env = std::getenv("QPS_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return backend::scalar;
    return avx2_available() ? backend::avx2 : backend::scalar;
}

std::atomic<int>& selected() {
    static std::atomic<int> b{static_cast<int>(detect())};
    return b;
}

} // namespace

bool avx2_available() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
}

backend active_backend() { return static_cast<backend>(selected().load()); }

void force_backend(backend b) {
    if (b == backend::avx2 && !avx2_available()) b = backend::scalar;
    selected().store(static_cast<int>(b));
}

std::string backend_name(backend b) { return b == backend::avx2 ? "avx2" : "scalar"; }

void discriminant_batch(std::span<const double> potential, std::span<const double> energies,
                        std::span<double> trace, std::span<int> scalings) {
    if (active_backend() == backend::avx2) avx2::discriminant_batch(potential, energies, trace, scalings);
    else scalar::discriminant_batch(potential, energies, trace, scalings);
}

void sturm_count_batch(std::span<const double> diag, std::span<const double> offdiag_sq,
                       std::span<const double> shifts, std::span<int> counts) {
    if (active_backend() == backend::avx2) avx2::sturm_count_batch(diag, offdiag_sq, shifts, counts);
    else scalar::sturm_count_batch(diag, offdiag_sq, shifts, counts);
}

void discriminant_extended(std::span<const double> potential, std::span<const double> energies,
                           std::span<long double> trace, std::span<int> scalings) {
    const long double down = std::ldexp(1.0L, -scale_exponent);
    const long double limit = std::ldexp(1.0L, scale_exponent);
    const std::size_t q = potential.size();
    for (std::size_t i = 0; i < energies.size(); ++i) {
        long double r00 = 1, r01 = 0, r10 = 0, r11 = 1;
        int count = 0;
        for (std::size_t n = 0; n < q; ++n) {
            long double t = static_cast<long double>(energies[i]) - potential[n];
            long double n00 = t * r00 - r10;
            long double n01 = t * r01 - r11;
            r10 = r00;
            r11 = r01;
            r00 = n00;
            r01 = n01;
            if ((n & 15) == 15 || n + 1 == q) {
                long double m = std::fmax(std::fmax(std::fabs(r00), std::fabs(r01)),
                                          std::fmax(std::fabs(r10), std::fabs(r11)));
                if (m > limit) {
                    r00 *= down;
                    r01 *= down;
                    r10 *= down;
                    r11 *= down;
                    ++count;
                }
            }
        }
        trace[i] = r00 + r11;
        scalings[i] = count;
    }
}

} // namespace qps::kernels
