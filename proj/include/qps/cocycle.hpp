#pragma once

#include "qps/fourier.hpp"

#include <cstdint>
#include <vector>

namespace qps {

/// SL(2) cocycle over x -> x + alpha. Either a Schrodinger cocycle
/// [[E - lambda f(x), -1], [1, 0]] (evaluated directly) or a general matrix map.
struct cocycle {
    double alpha = 0;
    /// Nonzero when alpha is the rational p/q (approximant runs).
    std::int64_t p = 0, q = 0;

    bool is_schrodinger = false;
    double lambda = 0;
    double energy = 0;
    scalar_map potential;
    matrix_map map;

    static cocycle schrodinger(double lambda, const scalar_map& f, double alpha, double energy);
    static cocycle schrodinger_rational(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q,
                                        double energy);
    static cocycle general(const matrix_map& a, double alpha);

    mat2c at(cplx x) const;
    mat2r at(double x) const;
    /// Largest |Im z| at which at() may be called.
    double reliable_strip() const;
};

struct transfer_result {
    mat2c m;
    /// The true product equals m * exp(log_scale).
    long double log_scale = 0;
};

/// Ordered product A(x+(k-1)alpha) ... A(x), renormalized every 32 steps.
transfer_result transfer(const cocycle& c, long k, cplx x);

double lyapunov(const cocycle& c, long k, int phases);

struct rotation_result {
    double rho = 0;
    double error = 0;
    bool converged = true;
    long iterations = 0;
    /// "periodic" for exact rational-orbit evaluation, "birkhoff" otherwise.
    const char* method = "birkhoff";
};

struct rotation_options {
    long iterations = 1'000'000;
    double x0 = 0;
    /// Error bars above this mark the result as not converged.
    double tolerance = 1e-6;
    /// Lift grid for general cocycles.
    int lift_grid = 4096;
};

/// Fibered rotation number from the lifted projective angle (Iwasawa lift: angle of the
/// first column of A plus the bounded upper-triangular part), averaged with smooth
/// Birkhoff weights; the error bar is the difference between the two half-orbit averages.
/// Schrodinger cocycles are folded into [0, 1/2]; general cocycles return the raw lift.
rotation_result rotation_number(const cocycle& c, const rotation_options& opt = {});
rotation_result rotation_number(const cocycle& c, long iterations, double x0);

struct conjugacy {
    matrix_map R;
    int degree = 0;
};

conjugacy make_conjugacy(const matrix_map& R);

/// RP^1 winding of x -> R(x)v over x in [0, 1]; R_x has degree 2.
int degree_of(const matrix_map& R);

/// B(x) = R(x+alpha)^{-1} A(x) R(x), rebuilt from samples.
cocycle conjugate(const cocycle& c, const conjugacy& R, int samples = 0);

struct strip_growth_point {
    long k = 0;
    double norm = 0;
    double log_norm = 0;
};

std::vector<strip_growth_point> strip_growth(const cocycle& c, double eta, long K, int grid = 64);

/// Matrix-valued map of x -> m(x) from an exact callable, sampled and transformed.
template <class F>
matrix_map matrix_map_from(F&& fn, int period, int samples, int band_limit) {
    return from_samples(sample([&](double x) { return to_complex(fn(x)); }, period, samples), period,
                        band_limit, true);
}

} // namespace qps
