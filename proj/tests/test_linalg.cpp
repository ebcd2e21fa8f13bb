#include <doctest.h>

#include "qps/errors.hpp"
#include "qps/linalg.hpp"

#include <random>

using namespace qps;

namespace {

// Truncated Taylor series as an independent reference for expm.
mat2r expm_series(const mat2r& a) {
    mat2r term = mat2r::identity(), sum = mat2r::identity();
    for (int n = 1; n < 40; ++n) {
        term = term * a * (1.0 / n);
        sum += term;
    }
    return sum;
}

double diff(const mat2r& a, const mat2r& b) { return max_abs(a - b); }

} // namespace

TEST_CASE("expm matches the Taylor series") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        mat2r a{u(rng), u(rng), u(rng), u(rng)};
        CHECK(diff(expm(a), expm_series(a)) < 1e-13);
    }
    mat2r nil{0, 1, 0, 0};
    CHECK(diff(expm(nil), mat2r{1, 1, 0, 1}) < 1e-15);
}

TEST_CASE("logm inverts expm on the principal branch") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int t = 0; t < 50; ++t) {
        mat2r a{u(rng), u(rng), u(rng), u(rng)};
        CHECK(diff(logm(expm(a)), a) < 1e-12);
    }
    mat2r parab{1, 0.1, 0, 1};
    CHECK(diff(logm(parab), mat2r{0, 0.1, 0, 0}) < 1e-15);
    CHECK_THROWS_AS(logm(mat2r{-1, 0, 0, -1}), numerical_error);
}

TEST_CASE("operator norm and rotations") {
    CHECK(op_norm(rotation(0.17)) == doctest::Approx(1.0));
    CHECK(op_norm(mat2r{3, 0, 0, 0.5}) == doctest::Approx(3.0));
    mat2r r = rotation(0.25);
    CHECK(std::abs(r.a) < 1e-15);
    CHECK(r.c == doctest::Approx(1.0));
}
