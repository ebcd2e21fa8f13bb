#include "qps/kernels.hpp"

#include <cmath>
#include <immintrin.h>

// Vector variants of the scalar kernels: four energies (or shifts) per register.
// Operation order mirrors the scalar code so results agree bitwise.

namespace qps::kernels::avx2 {

namespace {

inline __m256d vabs(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

} // namespace

void discriminant_batch(std::span<const double> potential, std::span<const double> energies,
                        std::span<double> trace, std::span<int> scalings) {
    const std::size_t q = potential.size();
    const std::size_t m = energies.size();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d down = _mm256_set1_pd(std::ldexp(1.0, -scale_exponent));
    const __m256d limit = _mm256_set1_pd(std::ldexp(1.0, scale_exponent));
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        __m256d e = _mm256_loadu_pd(energies.data() + i);
        __m256d r00 = one, r01 = _mm256_setzero_pd(), r10 = _mm256_setzero_pd(), r11 = one;
        __m256d count = _mm256_setzero_pd();
        for (std::size_t n = 0; n < q; ++n) {
            __m256d t = _mm256_sub_pd(e, _mm256_set1_pd(potential[n]));
            __m256d n00 = _mm256_sub_pd(_mm256_mul_pd(t, r00), r10);
            __m256d n01 = _mm256_sub_pd(_mm256_mul_pd(t, r01), r11);
            r10 = r00;
            r11 = r01;
            r00 = n00;
            r01 = n01;
            if ((n & 15) == 15 || n + 1 == q) {
                __m256d mx = _mm256_max_pd(_mm256_max_pd(vabs(r00), vabs(r01)),
                                           _mm256_max_pd(vabs(r10), vabs(r11)));
                __m256d big = _mm256_cmp_pd(mx, limit, _CMP_GT_OQ);
                if (_mm256_movemask_pd(big)) {
                    __m256d f = _mm256_blendv_pd(one, down, big);
                    r00 = _mm256_mul_pd(r00, f);
                    r01 = _mm256_mul_pd(r01, f);
                    r10 = _mm256_mul_pd(r10, f);
                    r11 = _mm256_mul_pd(r11, f);
                    count = _mm256_add_pd(count, _mm256_and_pd(big, one));
                }
            }
        }
        _mm256_storeu_pd(trace.data() + i, _mm256_add_pd(r00, r11));
        alignas(32) double c[4];
        _mm256_store_pd(c, count);
        for (int l = 0; l < 4; ++l) scalings[i + l] = static_cast<int>(c[l]);
    }
    if (i < m)
        scalar::discriminant_batch(potential, energies.subspan(i), trace.subspan(i), scalings.subspan(i));
}

void sturm_count_batch(std::span<const double> diag, std::span<const double> offdiag_sq,
                       std::span<const double> shifts, std::span<int> counts) {
    const std::size_t n = diag.size();
    const std::size_t m = shifts.size();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d floor_pos = _mm256_set1_pd(pivot_floor);
    const __m256d floor_neg = _mm256_set1_pd(-pivot_floor);
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
        __m256d x = _mm256_loadu_pd(shifts.data() + j);
        __m256d p = _mm256_sub_pd(_mm256_set1_pd(diag[0]), x);
        p = _mm256_blendv_pd(p, floor_neg, _mm256_cmp_pd(vabs(p), floor_pos, _CMP_LT_OQ));
        __m256d neg = _mm256_and_pd(_mm256_cmp_pd(p, zero, _CMP_LT_OQ), one);
        for (std::size_t i = 1; i < n; ++i) {
            __m256d t = _mm256_sub_pd(_mm256_set1_pd(diag[i]), x);
            p = _mm256_sub_pd(t, _mm256_div_pd(_mm256_set1_pd(offdiag_sq[i - 1]), p));
            p = _mm256_blendv_pd(p, floor_neg, _mm256_cmp_pd(vabs(p), floor_pos, _CMP_LT_OQ));
            neg = _mm256_add_pd(neg, _mm256_and_pd(_mm256_cmp_pd(p, zero, _CMP_LT_OQ), one));
        }
        alignas(32) double c[4];
        _mm256_store_pd(c, neg);
        for (int l = 0; l < 4; ++l) counts[j + l] = static_cast<int>(c[l]);
    }
    if (j < m) scalar::sturm_count_batch(diag, offdiag_sq, shifts.subspan(j), counts.subspan(j));
}

} // namespace qps::kernels::avx2
