#include <doctest.h>

#include "qps/fourier.hpp"

#include <random>

using namespace qps;

namespace {

scalar_map cos_map() { return real_trig({0.0, 0.5}); }

scalar_map random_real_map(std::mt19937_64& rng, int band) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cplx> c(band + 1);
    c[0] = g(rng);
    for (int k = 1; k <= band; ++k) c[k] = cplx(g(rng), g(rng)) * std::exp(-0.5 * k);
    return real_trig(c);
}

} // namespace

TEST_CASE("eval: closed forms") {
    auto c = cos_map();
    CHECK(std::abs(c.eval(cplx(0, 0.1)) - std::cosh(0.2 * pi)) < 1e-14);
    CHECK(std::abs(scalar_map(3).eval(cplx(0.3, 0.2))) == 0.0);
    scalar_map e(1, 1, false);
    e.at(1) = 1.0;
    CHECK(std::abs(e.eval(0.25) - cplx(0, 1)) < 1e-15);
}

TEST_CASE("eval refuses points outside the strip or with a large tail") {
    auto c = cos_map();
    CHECK_THROWS_AS(c.eval(cplx(0, 10.0)), strip_error);
    auto t = c;
    t.set_tail(1e-3);
    CHECK_THROWS_AS(t.eval(cplx(0, 0.1)), strip_error);
    try {
        t.eval(cplx(0, 0.1));
    } catch (const strip_error& e) {
        CHECK(e.tail_bound > 1e-3);
    }
}

TEST_CASE("strip_norm of cosine") {
    auto c = cos_map();
    CHECK(strip_norm(c, 0.0).value == doctest::Approx(1.0).epsilon(1e-12));
    double h = 0.07;
    CHECK(strip_norm(c, h).value == doctest::Approx(std::cosh(two_pi * h)).epsilon(1e-9));
    auto s = scale(c, 3.5);
    CHECK(strip_norm(s, h).value == doctest::Approx(3.5 * strip_norm(c, h).value).epsilon(1e-15));
    CHECK(strip_norm(c, h).value >= strip_norm(c, 0.0).value);
}

TEST_CASE("algebra: average, shift, product") {
    auto c = cos_map();
    CHECK(std::abs(average(c)) == 0.0);
    scalar_map e(1, 1, false);
    e.at(1) = 1.0;
    double alpha = 0.3819660112501051;
    auto es = shift(e, alpha);
    CHECK(std::abs(es.coeff(1) - std::exp(cplx(0, two_pi * alpha))) < 1e-15);
    auto cc = mul(c, c);
    CHECK(std::abs(cc.coeff(0) - 0.5) < 1e-15);
    CHECK(std::abs(cc.coeff(2) - 0.25) < 1e-15);
    CHECK(std::abs(cc.coeff(-2) - 0.25) < 1e-15);
    CHECK(std::abs(cc.coeff(1)) == 0.0);
    CHECK(cc.real_valued());
}

TEST_CASE("shift round trip is exact in coefficients up to rounding") {
    std::mt19937_64 rng(7);
    auto m = random_real_map(rng, 12);
    auto back = shift(shift(m, 0.123456789), -0.123456789);
    for (int k = -12; k <= 12; ++k) CHECK(std::abs(back.coeff(k) - m.coeff(k)) < 1e-15 * (1 + std::abs(m.coeff(k))));
}

TEST_CASE("real-valued flag propagates") {
    std::mt19937_64 rng(9);
    auto a = random_real_map(rng, 6), b = random_real_map(rng, 5);
    CHECK(add(a, b).real_valued());
    CHECK(mul(a, b).real_valued());
    CHECK(shift(a, 0.4).real_valued());
    CHECK(shift(a, 0.4).reality_defect() < 1e-13);
    CHECK(mul(a, b).reality_defect() < 1e-13);
    CHECK_FALSE(scale(a, cplx(0, 1)).real_valued());
}

TEST_CASE("submultiplicativity up to the reported tail") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        auto a = random_real_map(rng, 10), b = random_real_map(rng, 10);
        auto p = mul(a, b, 12);
        CHECK(p.tail() > 0.0);
        double d = 0.05;
        auto pn = p;
        pn.set_tail(0.0);
        double lhs = strip_norm(pn, d, 256).value;
        double rhs = strip_norm(a, d, 256).value * strip_norm(b, d, 256).value + p.tail() * std::exp(two_pi * 20 * d);
        CHECK(lhs <= rhs * (1 + 1e-12));
    }
}

TEST_CASE("from_samples recovers a trigonometric polynomial") {
    std::mt19937_64 rng(5);
    auto a = random_real_map(rng, 9);
    auto s = sample([&](double x) { return a.eval(x); }, 1, 64);
    auto b = from_samples(s, 1, 20, true);
    for (int k = -20; k <= 20; ++k) CHECK(std::abs(b.coeff(k) - a.coeff(k)) < 1e-13);
    // period-2 map e^{i pi x}
    auto s2 = sample([](double x) { return std::exp(cplx(0, pi * x)); }, 2, 32);
    auto c = from_samples(s2, 2, 4, false);
    CHECK(std::abs(c.coeff(1) - 1.0) < 1e-14);
    CHECK(std::abs(c.eval(0.5) - cplx(0, 1)) < 1e-14);
}

TEST_CASE("mixing periods throws") {
    scalar_map a(2, 1), b(2, 2);
    CHECK_THROWS_AS(add(a, b), period_mismatch);
    CHECK_THROWS_AS(mul(a, b), period_mismatch);
}

TEST_CASE("matrix maps: product and dump format") {
    matrix_map m(1, 1, true);
    m.at(0) = mat2c::identity();
    m.at(1) = mat2c{0.5, 0, 0, 0};
    m.at(-1) = mat2c{0.5, 0, 0, 0};
    auto sq = mul(m, m);
    CHECK(std::abs(sq.coeff(0).a - 1.5) < 1e-15);
    CHECK(std::abs(sq.coeff(2).a - 0.25) < 1e-15);
    auto text = dump(m);
    CHECK(text.find("-1 ") == 0);
    CHECK(text.find("0x1p-1") != std::string::npos);
    int lines = 0;
    for (char ch : text) lines += ch == '\n';
    CHECK(lines == 3);
}
