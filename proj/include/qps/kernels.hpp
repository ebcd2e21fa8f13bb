#pragma once

#include <span>
#include <string>

namespace qps::kernels {

/// Scalings by 2^-scale_exponent applied during long products.
inline constexpr int scale_exponent = 512;

enum class backend { scalar, avx2 };

bool avx2_available();
/// Backend used by the dispatching entry points; chosen once from CPU features,
/// overridable by QPS_SIMD=scalar in the environment or by force_backend.
backend active_backend();
void force_backend(backend b);
std::string backend_name(backend b);

/// Floquet discriminant tr(A(q-1)...A(0)) with A(n) = [[E - v[n], -1], [1, 0]] for every energy.
/// trace[i] is the true trace divided by 2^(scale_exponent * scalings[i]).
void discriminant_batch(std::span<const double> potential, std::span<const double> energies,
                        std::span<double> trace, std::span<int> scalings);

/// Negative-pivot count of the symmetric tridiagonal matrix T - x I for every shift x
/// (diagonal `diag`, squared off-diagonal `offdiag_sq` of length n-1), i.e. the number of
/// eigenvalues strictly below x.
void sturm_count_batch(std::span<const double> diag, std::span<const double> offdiag_sq,
                       std::span<const double> shifts, std::span<int> counts);

/// Extended-precision discriminant (scalar only); same scaling convention.
void discriminant_extended(std::span<const double> potential, std::span<const double> energies,
                           std::span<long double> trace, std::span<int> scalings);

namespace scalar {
void discriminant_batch(std::span<const double> potential, std::span<const double> energies,
                        std::span<double> trace, std::span<int> scalings);
void sturm_count_batch(std::span<const double> diag, std::span<const double> offdiag_sq,
                       std::span<const double> shifts, std::span<int> counts);
} // namespace scalar

namespace avx2 {
void discriminant_batch(std::span<const double> potential, std::span<const double> energies,
                        std::span<double> trace, std::span<int> scalings);
void sturm_count_batch(std::span<const double> diag, std::span<const double> offdiag_sq,
                       std::span<const double> shifts, std::span<int> counts);
} // namespace avx2

/// Pivot floor used when a Sturm pivot vanishes exactly.
inline constexpr double pivot_floor = 1e-300;

} // namespace qps::kernels
