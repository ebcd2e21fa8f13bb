#pragma once

#include "qps/arithmetic.hpp"
#include "qps/cocycle.hpp"
#include "qps/duality.hpp"

#include <optional>
#include <string>

namespace qps {

/// [[sign, mu], [0, sign]].
struct parabolic_form {
    int sign = 1;
    double mu = 0;

    mat2r matrix() const { return {static_cast<double>(sign), mu, 0.0, static_cast<double>(sign)}; }
    /// mu of the sign-normalized form sign * [[1, mu'], [0, 1]].
    double normalized_mu() const { return sign * mu; }
    bool collapsed(double tol = 1e-12) const { return std::abs(mu) < tol; }
};

/// phi with sign (phi(x + alpha) - phi(x)) = nu - [nu] and [phi] = 0.
scalar_map solve_homological_scalar(const scalar_map& nu, long double alpha, int sign, double divisor_cutoff = 1e-12);

/// Y with Y(x + alpha) P - P Y(x) = G - [G] for P parabolic, using the closed-form coefficient
/// recursion (entry 21 first, then 11 and 22, then 12).
matrix_map solve_homological_parabolic(const matrix_map& G, const parabolic_form& P, long double alpha,
                                       double divisor_cutoff = 1e-12);

/// Same equation for an arbitrary constant P, solved as a 4x4 linear system per Fourier mode.
matrix_map solve_homological_general(const matrix_map& G, const mat2r& P, long double alpha,
                                     double divisor_cutoff = 1e-12);

/// Sup over `grid` points of |lhs - rhs| for the matrix homological equation, relative to sup |G - [G]|.
double homological_residual(const matrix_map& Y, const matrix_map& G, const mat2r& P, long double alpha,
                            int grid = 4096);

struct averaging_report {
    double eps = 0;
    double delta = 0;
    double y_norm = 0;
    double r_minus_identity = 0;
    double p_shift = 0;
    double ptilde_next_norm = 0;
    double divisor_min = INFINITY;
    /// Relative grid residual of R^{-1}(x+alpha)(P + eps Pt(x))R(x) = P_next + eps^2 Pt_next(x).
    double identity_residual = 0;
    double homological_residual = 0;
    double trace_y = 0;
};

struct averaging_result {
    mat2r P_next;
    matrix_map Ptilde_next;
    matrix_map R_step;
    matrix_map Y;
    averaging_report report;
};

struct averaging_options {
    double divisor_cutoff = 1e-12;
    /// Largest allowed sup of |eps Y| on the working strip.
    double admissible = 0.5;
    int band_limit = 256;
};

/// One averaging step: R = exp(eps Y) removes the nonconstant order-eps term. Y solves the
/// homological equation against `homological_P` when given (default P).
averaging_result averaging_step(const mat2r& P, const matrix_map& Ptilde, double eps, long double alpha,
                                double delta, const averaging_options& opt = {},
                                const mat2r* homological_P = nullptr);

struct double_step_result {
    averaging_result step1, step2;
    mat2r P2;
    /// Remainder Pt2 with R_total^{-1}(x+alpha)(P + eps Pt)R_total = P2 + eps^3 Pt2.
    matrix_map Ptilde2;
    matrix_map R_total;
    /// Logarithm-form pieces (sign-normalized): log(sign P2) = frak_P + eps frak_P1 + eps^2 frak_P2.
    mat2r frak_P;
    mat2r frak_P1_closed;
    /// Closed form plus the second-order correction mu^2 [R11^2] / 6 in the (1,2) entry.
    mat2r frak_P1_exact;
    mat2r frak_P1_numeric;
    mat2r frak_P2;
    double remainder_norm = 0;
    /// Relative grid residual of the composite identity.
    double identity_residual = 0;
};

double_step_result double_step(const parabolic_form& P, const matrix_map& Ptilde, double eps, long double alpha,
                               double delta, const averaging_options& opt = {});

/// R1(x) = [V(x), T V(x) / (V . V)] with T(x, y) = (-y, x).
conjugacy build_frame(const vector_map& V, double min_norm = 1e-8, int samples = 4096);

struct reduce_options {
    double divisor_cutoff = 1e-12;
    int samples = 4096;
    /// Residual above which the reduction is flagged.
    double residual_tolerance = 1e-8;
    long iterate_l = 100;
    double criterion_threshold = 1.4142135623730951;
};

struct reduction {
    conjugacy R;
    conjugacy frame;
    parabolic_form P;
    scalar_map nu;
    scalar_map phi;
    double energy = 0;
    long n_tilde = 0;
    /// 'R' for the real part of U_hat, 'I' for the imaginary part.
    char choice = 'R';
    double criterion_real = 0, criterion_imag = 0;
    double residual = 0;
    bool flagged = false;
    double mu_iterate = 0;
    double mu_agreement = 0;
    /// sign * mu > 0, as expected at an upper gap edge.
    bool upper_edge_convention = false;
    bloch_waves waves;
};

reduction reduce_at_edge(const bloch_solution& sol, const frequency& freq, double lambda, const scalar_map& f,
                         const reduce_options& opt = {});

struct averages {
    double r11_sq = 0, r11_r12 = 0, r12_sq = 0, r21_sq = 0;
    double shift_identity_defect = 0;
    bool shift_identities = false;
    bool column_averages_equal = false;
    bool lower_bound = false;
    bool wronskian_positive = false;
    double wronskian = 0;
    double r_norm = 0;
};

averages average_identities(const matrix_map& R, const parabolic_form& P, long double alpha, int grid = 4096);

/// Pt(x) with R^{-1}(x+alpha) A^{E+eps}(x) R(x) = P + eps Pt(x); when `c` is given the identity is
/// checked at eps = probe and a failure throws.
matrix_map perturbation_matrix(const matrix_map& R, const parabolic_form& P, const cocycle* c = nullptr,
                               double probe = 1e-4, int samples = 2048);

/// -2 mu' [R11^2] / ([R11^2][R12^2] - [R11 R12]^2) with mu' the sign-normalized corner; 0 when collapsed.
double gap_edge_epsilon(const averages& av, const parabolic_form& P);

struct elliptic_form {
    mat2r Q;
    double sqrt_delta = 0;
};

/// Q with det 1 and Q^{-1} D Q = [[0, -sqrt(det D)], [sqrt(det D), 0]].
elliptic_form elliptic_normalize(const mat2r& D);

struct rotation_shift {
    bool differs = false;
    double rho_edge = 0, rho_shifted = 0;
    double error_edge = 0, error_shifted = 0;
    /// rho(E + eps) >= rho(E) for eps < 0 (within error bars).
    bool monotone = true;
};

rotation_shift rotation_shift_check(double e_edge, double eps, const frequency& freq, double lambda,
                                    const scalar_map& f, long iterations = 1'000'000);

/// Degree of the pointwise product R(x) R1(x) R2(x) (R of period 2, R1/R2 of period 1).
int composed_degree(const matrix_map& R, const matrix_map& R1, const matrix_map& R2, int samples = 4096);

} // namespace qps
