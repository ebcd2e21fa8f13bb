#pragma once

#include "qps/arithmetic.hpp"
#include "qps/duality.hpp"
#include "qps/io.hpp"
#include "qps/reducibility.hpp"
#include "qps/spectrum.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qps {

/// Bloch search tuned for approximant edges: edge polish on, energy tolerance 1e-3.
inline bloch_options edge_search_defaults() {
    bloch_options b;
    b.energy_tolerance = 1e-3;
    b.edge = true;
    return b;
}

struct pipeline_config {
    int jobs = 1;
    /// Finest approximant denominator.
    std::int64_t q_max = 233;
    /// Coarsest approximant used by the decay campaign (0: first q >= 4 max |m|).
    std::int64_t q_min = 0;
    /// Anchor the gap machinery at E_m^- instead of E_m^+.
    bool lower_edge = false;
    spectrum_options spectrum;
    bloch_options bloch = edge_search_defaults();
    reduce_options reduce;
    long rotation_iterations = 1'000'000;
    /// Resonance search range for n_tilde.
    long n_max = 200;
    /// Optional double averaging step at this eps on the perturbation matrix (0 disables).
    double expansion_eps = 0;
    int homogeneity_samples = 4000;
    double stable_relative = 0.1;
    double stable_absolute = 1e-13;
    /// Shared band-structure cache (may be null).
    stage_cache* cache = nullptr;
};

/// Band structure at the convergent p/q, through the configured cache when present.
band_structure approximant(double lambda, const scalar_map& f, const convergent& c, const pipeline_config& cfg);

struct expansion_summary {
    double eps = 0;
    double remainder_norm = 0;
    double identity_residual = 0;
    int degree_before = 0, degree_after = 0;
    mat2r P2;
    /// sqrt(Delta) of the elliptic normalization of frak_P + eps frak_P1 when that matrix is elliptic.
    std::optional<double> sqrt_delta;
};

struct gap_dossier {
    std::int64_t m = 0;
    convergent approximant;
    double e_minus = 0, e_plus = 0, width = 0;
    bool upper_edge = true;
    /// Approximant edge handed to the Bloch search.
    double edge_energy = 0;
    bloch_solution bloch;
    resonance res;
    double relation_residual = 0;
    reduction red;
    bool collapsed = false;
    std::optional<averages> av;
    double epsilon = 0;
    bool width_bound = false;
    /// |eps_m| - width.
    double width_slack = 0;
    std::optional<rotation_shift> shift;
    /// Corner mu and iterate mu agree, and sign * mu matches the edge side.
    bool mu_consistent = false;
    bool eps_opposite_mu = false;
    std::optional<expansion_summary> expansion;
    std::vector<std::string> notes;
};

/// Spectrum -> Bloch wave -> reduction -> averages -> eps_m -> rotation shift for the gap labeled m.
/// Stage failures are rethrown as numerical_error naming the stage.
gap_dossier analyze_gap(double lambda, const scalar_map& f, const frequency& freq, std::int64_t m,
                        const pipeline_config& cfg);

/// analyze_gap for every label in `labels` whose gap is open at the finest approximant.
std::vector<gap_dossier> analyze_gaps(double lambda, const scalar_map& f, const frequency& freq,
                                      const std::vector<std::int64_t>& labels, const pipeline_config& cfg);

struct decay_row {
    std::int64_t m = 0;
    /// Width at each visited convergent (0 when the gap is not resolved there).
    std::vector<double> widths;
    double width = 0;
    double e_minus = 0, e_plus = 0;
    double relative_change = INFINITY;
    bool stable = false;
};

struct decay_report {
    std::vector<convergent> convergents;
    std::vector<decay_row> rows;
    std::optional<decay_fit> fit;
    /// Widths strictly decrease in |m| over all rows.
    bool strictly_decreasing = false;
    /// Largest M such that |m| = 1..M are all resolved and strictly decreasing.
    std::int64_t monotone_through = 0;
    /// Every row is stable between the last two convergents.
    bool all_stable = false;
    std::vector<std::string> notes;
};

/// Widths of the gaps labeled `labels` over increasing convergents (q_min..q_max), stopping once
/// every label is stable; stable labels are fitted by ln(width) = c - gamma |m|.
decay_report decay_campaign(double lambda, const scalar_map& f, const frequency& freq,
                            const std::vector<std::int64_t>& labels, const pipeline_config& cfg);

struct homogeneity_row {
    double sigma = 0;
    double min_ratio = 0;
    double argmin = 0;
    window_gap_sum at_argmin;
    /// Largest gap measure inside a window centred on a band edge, divided by sigma.
    double max_gap_fraction = 0;
    /// Same without the lowest-label gap of each window.
    double max_gap_fraction_excluding_lowest = 0;
};

struct homogeneity_report {
    convergent approximant;
    std::vector<homogeneity_row> rows;
    /// min_ratio never decreases as sigma decreases.
    bool non_decreasing = false;
    double overall_min = 0;
};

homogeneity_report homogeneity_campaign(double lambda, const scalar_map& f, const frequency& freq,
                                        const std::vector<double>& sigmas, const pipeline_config& cfg);

struct claim {
    std::string name;
    bool pass = false;
    double measured = 0;
    double bound = 0;
    /// bound - measured for upper bounds, measured - bound for lower bounds.
    double slack = 0;
};

std::vector<claim> dossier_claims(const gap_dossier& d);
std::vector<claim> decay_claims(const decay_report& r);
std::vector<claim> homogeneity_claims(const homogeneity_report& r);

} // namespace qps
