#include <doctest.h>

#include "qps/arithmetic.hpp"
#include "qps/cocycle.hpp"
#include "qps/errors.hpp"

#include <cmath>

using namespace qps;

namespace {

const double golden = static_cast<double>(golden_mean().value);

matrix_map constant_map(const mat2r& a) { return matrix_map::constant(to_complex(a)); }

matrix_map rotation_map(double turns_per_period, int period) {
    return matrix_map_from([&](double x) { return rotation(turns_per_period * x / period); }, period, 64, 4);
}

} // namespace

TEST_CASE("free Schrodinger cocycle: rotation number is arccos(E/2)/(2 pi)") {
    auto f = cosine_potential();
    for (double rho : {0.05, 0.25, 0.3, 0.41}) {
        auto c = cocycle::schrodinger(0.0, f, golden, 2 * std::cos(two_pi * rho));
        auto r = rotation_number(c, 200000, 0.0);
        CHECK(r.rho == doctest::Approx(rho).epsilon(1e-9));
        CHECK(r.converged);
    }
    CHECK(rotation_number(cocycle::schrodinger(0.0, f, golden, -3.0), 20000, 0.0).rho == 0.5);
    CHECK(rotation_number(cocycle::schrodinger(0.0, f, golden, 3.0), 20000, 0.0).rho < 1e-12);
}

TEST_CASE("rotation number is monotone non-increasing in energy") {
    auto f = cosine_potential();
    double prev = 0.5;
    for (int i = 0; i <= 40; ++i) {
        double e = -2.6 + 5.2 * i / 40;
        double r = rotation_number(cocycle::schrodinger(1.0, f, golden, e), 40000, 0.0).rho;
        CHECK(r <= prev + 1e-6);
        prev = r;
    }
}

TEST_CASE("rational approximant uses the exact periodic orbit in gaps") {
    auto f = cosine_potential();
    // far below the spectrum: rho = 1/2 exactly
    auto r = rotation_number(cocycle::schrodinger_rational(1.0, f, 5, 8, -4.0), 1 << 12, 0.1);
    CHECK(std::string(r.method) == "periodic");
    CHECK(r.rho == 0.5);
}

TEST_CASE("constant rotation and its conjugation by a degree-2 map") {
    auto c = cocycle::general(constant_map(rotation(0.3)), 0.1);
    CHECK(rotation_number(c, 20000, 0.0).rho == doctest::Approx(0.3).epsilon(1e-12));
    auto R = make_conjugacy(rotation_map(1.0, 1));
    CHECK(R.degree == 2);
    auto b = conjugate(c, R);
    // R(x+alpha)^{-1} R_0.3 R(x) = R_{0.3 - alpha}
    CHECK(max_abs(b.at(0.37) - rotation(0.2)) < 1e-12);
    CHECK(rotation_number(b, 20000, 0.0).rho == doctest::Approx(0.3 - R.degree * 0.1 / 2).epsilon(1e-10));
}

TEST_CASE("degree of half-speed rotation on the doubled circle") {
    CHECK(degree_of(rotation_map(1.0, 2)) == 1);
    CHECK(degree_of(constant_map(mat2r{2, 1, 1, 1})) == 0);
    CHECK(degree_of(rotation_map(-2.0, 1)) == -4);
}

TEST_CASE("non-contractible cocycles are rejected by the lift") {
    auto c = cocycle::general(rotation_map(1.0, 1), golden);
    CHECK_THROWS_AS(rotation_number(c, 1000, 0.0), invalid_input);
}

TEST_CASE("transfer matrices: powers and the cocycle identity") {
    mat2r a{2, 1, 1, 1};
    auto c = cocycle::general(constant_map(a), golden);
    auto t = transfer(c, 10, 0.2);
    mat2r pw = mat2r::identity();
    for (int i = 0; i < 10; ++i) pw = a * pw;
    mat2r got = real_part(t.m) * static_cast<double>(std::exp(t.log_scale));
    CHECK(max_abs(got - pw) < 1e-9 * max_abs(pw));
    CHECK(lyapunov(c, 200, 3) == doctest::Approx(std::log((3 + std::sqrt(5.0)) / 2)).epsilon(1e-2));

    auto s = cocycle::schrodinger(1.3, cosine_potential(), golden, 0.4);
    for (long n : {1L, 7L, 40L}) {
        for (long m : {1L, 13L, 50L}) {
            double x = 0.123;
            auto whole = transfer(s, n + m, x);
            auto first = transfer(s, n, x);
            auto second = transfer(s, m, x + n * golden);
            mat2c lhs = whole.m * std::exp(static_cast<double>(whole.log_scale));
            mat2c rhs = second.m * first.m *
                        std::exp(static_cast<double>(first.log_scale + second.log_scale));
            CHECK(max_abs(lhs - rhs) <= 1e-10 * std::max(1.0, max_abs(lhs)));
        }
    }
    CHECK_THROWS_AS(transfer(s, 0, 0.0), invalid_input);
}

TEST_CASE("supercritical Lyapunov exponent obeys the lower bound log(lambda)") {
    auto f = cosine_potential();
    for (double e : {-1.0, 0.0, 0.7}) {
        double l = lyapunov(cocycle::schrodinger(3.0, f, golden, e), 4000, 4);
        CHECK(l >= std::log(3.0) - 0.02);
    }
}

TEST_CASE("strip growth of a hyperbolic constant cocycle") {
    mat2r a{2, 1, 1, 1};
    auto c = cocycle::general(constant_map(a), golden);
    auto g = strip_growth(c, 0.05, 64, 8);
    REQUIRE(g.size() == 7);
    CHECK(g.back().k == 64);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i].norm > g[i - 1].norm);
    CHECK(g.back().log_norm / 64 == doctest::Approx(std::log((3 + std::sqrt(5.0)) / 2)).epsilon(1e-2));
}
