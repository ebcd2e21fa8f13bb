#pragma once

#include "qps/arithmetic.hpp"
#include "qps/fourier.hpp"

#include <optional>
#include <vector>

namespace qps {

/// Truncated dual long-range operator on sites n in [-N, N]:
/// (H x)_n = sum_k lambda f_k x_{n-k} + 2 cos 2pi(theta + n alpha) x_n.
struct dual_operator {
    int N = 0;
    long double theta = 0;
    std::vector<double> diag;
    /// offdiag[k-1][i] = H(i, i+k) for row index i = n + N.
    std::vector<std::vector<double>> offdiag;

    int size() const { return 2 * N + 1; }
    int bandwidth() const { return static_cast<int>(offdiag.size()); }
    /// Gershgorin enclosure of the spectrum.
    std::pair<double, double> bounds() const;
};

/// Requires f even (real coefficients) so the operator is real symmetric.
dual_operator dual_matrix(double lambda, const scalar_map& f, long double alpha, long double theta, int N);

/// Number of eigenvalues strictly below sigma (Sylvester inertia of a banded LDL^T).
int count_below(const dual_operator& h, double sigma);

/// Eigenvalue with the given index (0 = smallest) by bisection.
double eigenvalue_at(const dual_operator& h, int index);

struct nearest_eigen {
    double value = 0;
    int index = 0;
    /// Distance to the next eigenvalue on either side.
    double separation = 0;
};

nearest_eigen nearest_eigenvalue(const dual_operator& h, double energy);

/// Unit eigenvector for an isolated eigenvalue by inverse iteration.
std::vector<double> eigenvector(const dual_operator& h, double eigenvalue);

struct bloch_options {
    int N = 256;
    int N_max = 4096;
    int theta_grid = 512;
    /// Stop doubling once the eigenvalue moves by less than this and the tail beyond N/2 is below it.
    double truncation_tolerance = 1e-10;
    double theta_tolerance = 1e-12;
    /// Accept the solution only if the selected eigenvalue is this close to the requested energy.
    double energy_tolerance = 1e-6;
    /// The energy is an approximate gap edge: move theta to the nearby extremum of the eigenvalue branch.
    bool edge = false;
    int jobs = 1;
};

struct bloch_solution {
    double energy = 0;
    /// Eigenvalue of the dual operator at theta (the energy actually represented).
    double eigenvalue = 0;
    long double theta = 0;
    int N = 0;
    /// u_hat[k + N], normalized so u_hat(0) = 1 and |u_hat(k)| <= 1.
    std::vector<double> u_hat;
    std::optional<long> n_tilde;
    double resonance_defect = 0;
    double duality_residual = 0;
    double decay_rate = 0;
    int decay_onset = 0;
    double separation = 0;
    /// Truncation sizes visited and eigenvalue at each.
    std::vector<std::pair<int, double>> truncation_history;
    /// theta was mapped to 1 - theta (mirror n -> -n) to land in [0, 1/2].
    bool reflected = false;

    double coeff(long k) const { return (k < -N || k > N) ? 0.0 : u_hat[static_cast<std::size_t>(k + N)]; }
};

/// Scan theta for an eigenvalue of the dual operator at `energy`, refine, recentre the
/// eigenvector on its largest entry and double the truncation until stable.
bloch_solution find_bloch(double lambda, const scalar_map& f, const frequency& freq, double energy,
                          const bloch_options& opt = {});

/// Eigenpair at the given theta without any search (truncation doubling still applies).
bloch_solution bloch_at_theta(double lambda, const scalar_map& f, const frequency& freq, double energy,
                              long double theta, const bloch_options& opt = {});

struct resonance {
    long n_tilde = 0;
    double defect = 0;
    /// |m| / |n_tilde| when a gap label is supplied (0 otherwise).
    double label_ratio = 0;
};

/// Integer n with |n| <= n_max minimizing ||2 theta - n alpha||; none if the minimum exceeds tolerance.
std::optional<resonance> detect_resonance(const bloch_solution& sol, const frequency& freq, long n_max,
                                          double tolerance = 1e-6, long label = 0);

/// Recompute the Bloch solution at the exact resonant phase n alpha / 2 (folded into [0, 1/2]).
bloch_solution snap_to_resonance(double lambda, const scalar_map& f, const frequency& freq,
                                 const bloch_solution& sol, long n_tilde, const bloch_options& opt = {});

struct bloch_waves {
    /// U(x) = (e^{2 pi i theta} u(x), u(x - alpha)), period 1.
    vector_map U;
    /// U_hat(x) = e^{i pi n x} U(x), period 2.
    vector_map U_hat;
    /// A(x) U_hat(x) = sign U_hat(x + alpha).
    int sign = 1;
    double residual = 0;
    double residual_real = 0;
    double residual_imag = 0;
};

bloch_waves assemble_U(const bloch_solution& sol, const frequency& freq, double lambda, const scalar_map& f,
                       double tolerance = 1e-6);

/// Sup over a 1024-point grid of |S_E(x) U(x) - e^{2 pi i theta} U(x + alpha)| / sup |U|.
double duality_residual(const bloch_solution& sol, const frequency& freq, double lambda, const scalar_map& f);

/// Fraction of eigenvalues below E, averaged over theta samples.
double dual_counting_function(double lambda, const scalar_map& f, const frequency& freq, double energy, int N,
                              int theta_samples);

} // namespace qps
