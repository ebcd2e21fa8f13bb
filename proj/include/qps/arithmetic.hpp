#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qps {

struct convergent {
    std::int64_t p = 0;
    std::int64_t q = 1;
};

/// An irrational frequency with its continued-fraction data.
/// cf[i] is the partial quotient a_{i+1}; convergents[i] is p_{i+1}/q_{i+1}.
struct frequency {
    long double value = 0;
    std::vector<std::int64_t> cf;
    std::vector<convergent> convergents;
    /// Expansion stopped early (precision floor or synthesis overflow).
    bool truncated = false;
    /// Set by synth_liouville when the requested number of growth levels could not be built.
    bool warning = false;
    /// Index in `cf` of the first Liouville growth level (synthesized frequencies only).
    int growth_start = -1;
    /// Number of growth levels actually built.
    int growth_levels = 0;
    std::string name;

    double alpha() const { return static_cast<double>(value); }
    /// Largest stored convergent with q <= q_max; throws if none.
    convergent best_convergent(std::int64_t q_max) const;
    /// All stored convergents with 2 <= q <= q_max, in order.
    std::vector<convergent> convergents_up_to(std::int64_t q_max) const;
};

struct beta_witness {
    std::int64_t k = 0;
    long double ratio = 0;
};

struct beta_estimate {
    long double beta = 0;
    std::vector<beta_witness> witnesses;
    /// Witness ratios along the last three convergents grow monotonically (beta may be infinite).
    bool monotone_growth = false;
    std::int64_t k_lo = 1;
    std::int64_t k_hi = 1;
};

long double norm_dist(long double x);
double norm_dist(double x);

frequency expand_cf(long double alpha, int depth);
/// Rebuild a frequency from a list of partial quotients.
frequency from_cf(const std::vector<std::int64_t>& cf);

/// Tail estimate of the limsup: maximum of -ln||k alpha||/k over the window
/// [q_{j-1}, k_max], where q_j is the largest convergent denominator <= k_max.
/// The maximum over the window is attained at convergent denominators.
beta_estimate estimate_beta(const frequency& f, std::int64_t k_max);
/// Same window, every k scanned.
beta_estimate estimate_beta_brute(const frequency& f, std::int64_t k_max);
/// Convergent shortcut and brute force over an explicit range [k_lo, k_hi].
beta_estimate beta_over_range(const frequency& f, std::int64_t k_lo, std::int64_t k_hi);
beta_estimate beta_over_range_brute(const frequency& f, std::int64_t k_lo, std::int64_t k_hi);

frequency synth_liouville(double target_beta, int levels, std::uint64_t seed);

double small_divisor(const frequency& f, std::int64_t k);
double small_divisor(double alpha, std::int64_t k);
/// ||k alpha|| e^{2 beta |k|}, the quantity bounded below by C(alpha).
double small_divisor_ratio(const frequency& f, std::int64_t k, double beta);

frequency golden_mean(int depth = 40);
frequency sqrt2_minus_1(int depth = 40);

/// `value_hex, beta_estimate, a1 a2 a3 ...`
std::string serialize(const frequency& f, double beta);
frequency deserialize_frequency(const std::string& line);

/// Modular inverse of p modulo q (q >= 1, gcd = 1).
std::int64_t mod_inverse(std::int64_t p, std::int64_t q);

} // namespace qps
