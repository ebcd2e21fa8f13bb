#include "qps/arithmetic.hpp"
#include "qps/errors.hpp"

#include <cfloat>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <sstream>
#include <tuple>

namespace qps {

namespace {

// Beyond this denominator the remainder of an extended-precision expansion
// no longer carries reliable digits (q^2 * eps ~ 1e-3).
constexpr std::int64_t reliable_q = 48'000'000;
// Synthesized growth levels stop once a denominator could exceed this;
// the tail of ones then runs up to tail_q_cap.
constexpr long double synth_q_cap = 1e9L;
constexpr long double tail_q_cap = 1e8L;

void push_quotient(frequency& f, std::int64_t a) {
    // p_{-1}/q_{-1} = 1/0 and p_0/q_0 = 0/1 seed the recursion.
    std::size_t n = f.convergents.size();
    convergent prev = n >= 1 ? f.convergents[n - 1] : convergent{0, 1};
    convergent prev2 = n >= 2 ? f.convergents[n - 2] : (n == 1 ? convergent{0, 1} : convergent{1, 0});
    f.cf.push_back(a);
    f.convergents.push_back({a * prev.p + prev2.p, a * prev.q + prev2.q});
}

long double cf_value(const std::vector<std::int64_t>& cf) {
    long double x = 0;
    for (auto it = cf.rbegin(); it != cf.rend(); ++it) x = 1.0L / (static_cast<long double>(*it) + x);
    return x;
}

long double witness_ratio(long double value, std::int64_t k) {
    long double d = norm_dist(static_cast<long double>(k) * value);
    if (d <= 0) return INFINITY;
    return -std::log(d) / static_cast<long double>(k);
}

std::vector<std::int64_t> denominators(const frequency& f) {
    std::vector<std::int64_t> d{1};
    for (const auto& c : f.convergents)
        if (c.q > d.back()) d.push_back(c.q);
    return d;
}

void add_witness(beta_estimate& b, std::int64_t k, long double r) {
    if (b.witnesses.empty() || r > b.beta) {
        b.beta = r;
        b.witnesses.push_back({k, r});
    }
}

} // namespace

long double norm_dist(long double x) {
    long double r = x - std::floor(x);
    return r > 0.5L ? 1.0L - r : r;
}

double norm_dist(double x) {
    double r = x - std::floor(x);
    return r > 0.5 ? 1.0 - r : r;
}

convergent frequency::best_convergent(std::int64_t q_max) const {
    const convergent* best = nullptr;
    for (const auto& c : convergents)
        if (c.q <= q_max && c.q >= 1) best = &c;
    if (!best) throw invalid_input("no convergent with q <= " + std::to_string(q_max));
    return *best;
}

std::vector<convergent> frequency::convergents_up_to(std::int64_t q_max) const {
    std::vector<convergent> out;
    for (const auto& c : convergents)
        if (c.q >= 2 && c.q <= q_max && (out.empty() || c.q > out.back().q)) out.push_back(c);
    return out;
}

frequency expand_cf(long double alpha, int depth) {
    if (!(alpha > 0 && alpha < 1)) throw invalid_input("expand_cf: alpha must lie in (0,1)");
    if (depth < 1) throw invalid_input("expand_cf: depth must be positive");
    frequency f;
    f.value = alpha;
    long double x = alpha;
    for (int k = 1; k <= depth; ++k) {
        if (!f.convergents.empty() && f.convergents.back().q > reliable_q) {
            f.truncated = true;
            break;
        }
        long double y = 1.0L / x;
        if (y > 1e12L)
            throw rational_input("expand_cf: partial quotient overflows at depth " + std::to_string(k));
        auto a = static_cast<std::int64_t>(std::floor(y));
        long double rem = y - static_cast<long double>(a);
        push_quotient(f, a);
        long double q = static_cast<long double>(f.convergents.back().q);
        if (k < depth && rem < 64.0L * LDBL_EPSILON * q * q)
            throw rational_input("expand_cf: expansion terminates at depth " + std::to_string(k));
        x = rem;
    }
    return f;
}

frequency from_cf(const std::vector<std::int64_t>& cf) {
    if (cf.empty()) throw invalid_input("from_cf: empty expansion");
    frequency f;
    for (auto a : cf) {
        if (a < 1) throw invalid_input("from_cf: partial quotients must be positive");
        push_quotient(f, a);
    }
    f.value = cf_value(cf);
    return f;
}

beta_estimate beta_over_range(const frequency& f, std::int64_t k_lo, std::int64_t k_hi) {
    beta_estimate b;
    b.k_lo = k_lo;
    b.k_hi = k_hi;
    for (auto q : denominators(f))
        if (q >= k_lo && q <= k_hi) add_witness(b, q, witness_ratio(f.value, q));
    return b;
}

beta_estimate beta_over_range_brute(const frequency& f, std::int64_t k_lo, std::int64_t k_hi) {
    beta_estimate b;
    b.k_lo = k_lo;
    b.k_hi = k_hi;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) add_witness(b, k, witness_ratio(f.value, k));
    return b;
}

namespace {

std::pair<std::int64_t, std::int64_t> tail_window(const frequency& f, std::int64_t k_max) {
    auto d = denominators(f);
    std::size_t j = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] <= k_max) j = i;
    std::int64_t lo = j > 0 ? d[j - 1] : 1;
    return {lo, k_max};
}

void flag_growth(const frequency& f, std::int64_t k_max, beta_estimate& b) {
    std::vector<long double> r;
    for (auto q : denominators(f))
        if (q <= k_max) r.push_back(witness_ratio(f.value, q));
    auto n = r.size();
    b.monotone_growth = n >= 3 && r[n - 1] > r[n - 2] && r[n - 2] > r[n - 3];
}

} // namespace

beta_estimate estimate_beta(const frequency& f, std::int64_t k_max) {
    if (k_max < 1) throw invalid_input("estimate_beta: k_max must be positive");
    auto [lo, hi] = tail_window(f, k_max);
    auto b = beta_over_range(f, lo, hi);
    flag_growth(f, k_max, b);
    return b;
}

beta_estimate estimate_beta_brute(const frequency& f, std::int64_t k_max) {
    if (k_max < 1) throw invalid_input("estimate_beta: k_max must be positive");
    auto [lo, hi] = tail_window(f, k_max);
    auto b = beta_over_range_brute(f, lo, hi);
    flag_growth(f, k_max, b);
    return b;
}

frequency synth_liouville(double target_beta, int levels, std::uint64_t seed) {
    if (!(target_beta > 0) || !std::isfinite(target_beta))
        throw invalid_input("synth_liouville: target beta must be positive");
    if (levels < 3) throw invalid_input("synth_liouville: levels must be at least 3");
    std::mt19937_64 rng(seed);
    const long double beta = target_beta;

    std::vector<std::int64_t> cf{static_cast<std::int64_t>(1 + rng() % 3)};
    std::int64_t q_prev = 1, q = cf[0];
    auto advance = [&](std::int64_t a) {
        std::int64_t next = a * q + q_prev;
        q_prev = q;
        q = next;
        cf.push_back(a);
    };
    // Golden-like prefix until the growth window [e^{bq}, 2e^{bq}] admits a quotient a >= 1 and
    // its ln2/q slack is within a tenth of the target rate.
    while (std::exp(beta * q) < static_cast<long double>(q + q_prev) || std::log(2.0L) / q > 0.1L * beta)
        advance(1);

    frequency f;
    f.growth_start = static_cast<int>(cf.size()) - 1;
    for (int n = 0; n < levels; ++n) {
        long double lo = std::exp(beta * q);
        long double hi = 2.0L * lo;
        if (!std::isfinite(hi) || hi > synth_q_cap) {
            f.warning = true;
            f.truncated = true;
            break;
        }
        auto a_min = static_cast<std::int64_t>(std::ceil((lo - q_prev) / q));
        auto a_max = static_cast<std::int64_t>(std::floor((hi - q_prev) / q));
        a_min = std::max<std::int64_t>(a_min, 1);
        if (a_max < a_min) a_max = a_min;
        advance(a_min + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(a_max - a_min + 1)));
        ++f.growth_levels;
    }
    // Tail of ones so the value stays irrational to working precision.
    do advance(1);
    while (static_cast<long double>(q) < tail_q_cap);

    frequency built = from_cf(cf);
    built.truncated = f.truncated;
    built.warning = f.warning;
    built.growth_start = f.growth_start;
    built.growth_levels = f.growth_levels;
    std::ostringstream name;
    name << "liouville:beta=" << target_beta << ":seed=" << seed;
    built.name = name.str();
    return built;
}

double small_divisor(double alpha, std::int64_t k) {
    if (k == 0) throw invalid_input("small_divisor: k must be nonzero");
    return static_cast<double>(norm_dist(static_cast<long double>(k) * static_cast<long double>(alpha)));
}

double small_divisor(const frequency& f, std::int64_t k) {
    if (k == 0) throw invalid_input("small_divisor: k must be nonzero");
    return static_cast<double>(norm_dist(static_cast<long double>(k) * f.value));
}

double small_divisor_ratio(const frequency& f, std::int64_t k, double beta) {
    return small_divisor(f, k) * std::exp(2.0 * beta * std::abs(static_cast<double>(k)));
}

frequency golden_mean(int depth) {
    auto f = expand_cf((std::sqrt(5.0L) - 1.0L) / 2.0L, depth);
    f.name = "golden";
    return f;
}

frequency sqrt2_minus_1(int depth) {
    auto f = expand_cf(std::sqrt(2.0L) - 1.0L, depth);
    f.name = "sqrt2m1";
    return f;
}

std::string serialize(const frequency& f, double beta) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%La, %.17g,", f.value, beta);
    std::string out = buf;
    for (auto a : f.cf) out += " " + std::to_string(a);
    return out;
}

frequency deserialize_frequency(const std::string& line) {
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw invalid_input("frequency record: expected three comma-separated fields");
    long double value = std::strtold(line.substr(0, c1).c_str(), nullptr);
    std::istringstream cfs(line.substr(c2 + 1));
    std::vector<std::int64_t> cf;
    std::int64_t a;
    while (cfs >> a) cf.push_back(a);
    if (cf.empty()) throw invalid_input("frequency record: no partial quotients");
    frequency f = from_cf(cf);
    f.value = value;
    return f;
}

std::int64_t mod_inverse(std::int64_t p, std::int64_t q) {
    if (q == 1) return 0;
    std::int64_t r0 = q, r1 = ((p % q) + q) % q, s0 = 0, s1 = 1;
    while (r1 != 0) {
        std::int64_t t = r0 / r1;
        std::tie(r0, r1) = std::make_pair(r1, r0 - t * r1);
        std::tie(s0, s1) = std::make_pair(s1, s0 - t * s1);
    }
    if (r0 != 1) throw invalid_input("mod_inverse: arguments not coprime");
    return ((s0 % q) + q) % q;
}

} // namespace qps
