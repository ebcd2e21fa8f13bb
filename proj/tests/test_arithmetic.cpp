#include <doctest.h>

#include "qps/arithmetic.hpp"
#include "qps/errors.hpp"

#include <cmath>

using namespace qps;

TEST_CASE("norm_dist basic values") {
    CHECK(norm_dist(0.5) == doctest::Approx(0.5));
    CHECK(norm_dist(3.25) == doctest::Approx(0.25));
    CHECK(norm_dist(1.0 - 1e-9) == doctest::Approx(1e-9).epsilon(1e-6));
    CHECK(norm_dist(-0.3) == doctest::Approx(0.3));
}

TEST_CASE("golden mean expands to ones with Fibonacci denominators") {
    auto f = golden_mean(10);
    REQUIRE(f.cf.size() == 10);
    std::int64_t a = 1, b = 2;
    for (int k = 0; k < 10; ++k) {
        CHECK(f.cf[k] == 1);
        CHECK(f.convergents[k].q == a);
        std::int64_t c = a + b;
        a = b;
        b = c;
    }
}

TEST_CASE("sqrt(2) - 1 expands to twos") {
    auto f = expand_cf(std::sqrt(2.0L) - 1.0L, 6);
    REQUIRE(f.cf.size() == 6);
    for (auto a : f.cf) CHECK(a == 2);
}

TEST_CASE("rational inputs are rejected") {
    CHECK_THROWS_AS(expand_cf(0.5L, 5), rational_input);
    CHECK_THROWS_AS(expand_cf(0.3L, 10), rational_input);
    CHECK_THROWS_AS(expand_cf(3.0L / 8.0L, 8), rational_input);
    CHECK_THROWS_AS(expand_cf(1.5L, 3), invalid_input);
}

TEST_CASE("convergent invariants hold for stored convergents") {
    for (auto f : {golden_mean(), sqrt2_minus_1(), expand_cf(std::acos(-1.0L) - 3.0L, 12),
                   synth_liouville(0.3, 4, 11)}) {
        const auto& c = f.convergents;
        for (std::size_t k = 1; k < c.size(); ++k) {
            // recursion and determinant identity
            std::int64_t q_prev2 = k >= 2 ? c[k - 2].q : 1;
            CHECK(c[k].q == f.cf[k] * c[k - 1].q + q_prev2);
            CHECK(std::abs(c[k].p * c[k - 1].q - c[k - 1].p * c[k].q) == 1);
        }
        for (std::size_t k = 0; k + 1 < c.size(); ++k) {
            if (c[k + 1].q > 40'000'000) break;
            long double qk = c[k].q, qn = c[k + 1].q;
            long double err = std::fabs(f.value - static_cast<long double>(c[k].p) / qk);
            CHECK(err < 1.0L / (qk * qn));
            long double d = norm_dist(qk * f.value);
            CHECK(d < 1.0L / qn);
            CHECK(d > 1.0L / (qn + qk));
        }
    }
}

TEST_CASE("reconstruction from cf agrees within 1/q^2") {
    auto f = expand_cf(std::sqrt(3.0L) - 1.0L, 15);
    auto g = from_cf(f.cf);
    long double q = f.convergents.back().q;
    CHECK(std::fabs(g.value - f.value) <= 1.0L / (q * q));
}

TEST_CASE("estimate_beta: golden mean stays small") {
    auto f = golden_mean();
    auto b = estimate_beta(f, 10000);
    CHECK(b.beta <= 0.01L);
    CHECK_FALSE(b.monotone_growth);
}

TEST_CASE("estimate_beta: convergent shortcut equals brute force exactly") {
    for (auto f : {golden_mean(), sqrt2_minus_1(), synth_liouville(0.3, 4, 3), synth_liouville(0.5, 3, 9)}) {
        for (std::int64_t kmax : {50, 1000, 20000}) {
            auto a = estimate_beta(f, kmax);
            auto b = estimate_beta_brute(f, kmax);
            CHECK(a.beta == b.beta);
            REQUIRE(a.witnesses.size() == b.witnesses.size());
            for (std::size_t i = 0; i < a.witnesses.size(); ++i) CHECK(a.witnesses[i].k == b.witnesses[i].k);
            auto full = beta_over_range(f, 1, kmax);
            auto full_brute = beta_over_range_brute(f, 1, kmax);
            CHECK(full.beta == full_brute.beta);
        }
    }
}

TEST_CASE("synth_liouville: growth law and beta recovery") {
    for (double beta : {0.2, 0.3, 0.5}) {
        for (std::uint64_t seed : {1u, 2u, 3u, 17u}) {
            auto f = synth_liouville(beta, 4, seed);
            REQUIRE(f.growth_levels >= 1);
            for (int n = 0; n < f.growth_levels; ++n) {
                double qn = static_cast<double>(f.convergents[f.growth_start + n].q);
                double qn1 = static_cast<double>(f.convergents[f.growth_start + n + 1].q);
                double r = std::log(qn1) / qn;
                CHECK(r >= beta - 1e-12);
                CHECK(r <= beta + std::log(2.0) / qn + 1e-12);
            }
            std::int64_t top = f.convergents[f.growth_start + f.growth_levels].q;
            auto est = estimate_beta(f, top);
            auto brute = estimate_beta_brute(f, std::min<std::int64_t>(top, 2'000'000));
            if (top <= 2'000'000) CHECK(est.beta == brute.beta);
            CHECK(static_cast<double>(est.beta) >= 0.9 * beta);
            CHECK(static_cast<double>(est.beta) <= 1.1 * beta);
        }
    }
}

TEST_CASE("synth_liouville: determinism and argument checks") {
    auto a = synth_liouville(0.3, 4, 42);
    auto b = synth_liouville(0.3, 4, 42);
    CHECK(a.cf == b.cf);
    CHECK(a.value == b.value);
    CHECK(serialize(a, 0.3) == serialize(b, 0.3));
    CHECK_THROWS_AS(synth_liouville(0.0, 4, 1), invalid_input);
    CHECK_THROWS_AS(synth_liouville(0.3, 2, 1), invalid_input);
    auto big = synth_liouville(0.5, 6, 1);
    CHECK(big.warning);
    CHECK(big.truncated);
}

TEST_CASE("small_divisor values") {
    auto g = golden_mean();
    for (std::size_t n = 2; n + 1 < 25; ++n) {
        auto qn = g.convergents[n].q;
        double d = small_divisor(g, qn);
        double inv = 1.0 / static_cast<double>(g.convergents[n + 1].q);
        CHECK(d <= 2.0 * inv);
        CHECK(d >= 0.5 * inv);
        CHECK(small_divisor(g, -qn) == d);
    }
    CHECK(small_divisor(0.3, 1) == doctest::Approx(0.3));
    CHECK_THROWS_AS(small_divisor(g, 0), invalid_input);
    CHECK(small_divisor_ratio(g, 5, 0.0) == doctest::Approx(small_divisor(g, 5)));
}

TEST_CASE("serialization round trip is exact") {
    auto f = synth_liouville(0.2, 3, 5);
    auto line = serialize(f, 0.2);
    auto g = deserialize_frequency(line);
    CHECK(g.value == f.value);
    CHECK(g.cf == f.cf);
    CHECK(line.find("0x") == 0);
}

TEST_CASE("mod_inverse") {
    CHECK(mod_inverse(8, 13) == 5);
    CHECK((144 * mod_inverse(144, 233)) % 233 == 1);
    CHECK_THROWS(mod_inverse(4, 8));
}
