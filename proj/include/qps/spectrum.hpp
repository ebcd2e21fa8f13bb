#pragma once

#include "qps/arithmetic.hpp"
#include "qps/fourier.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qps {

struct band {
    double lo = 0, hi = 0;
    /// Extremal theta refinement ran out of budget for this band.
    bool flagged = false;
};

/// Spectrum of the periodic approximant p/q: union over theta of the q Floquet bands.
struct band_structure {
    std::int64_t p = 0, q = 1;
    double lambda = 0;
    scalar_map potential;
    int theta_grid = 0;
    /// Per-index theta unions, index order (q entries).
    std::vector<band> index_bands;
    /// Merged disjoint bands, sorted.
    std::vector<band> bands;
    /// below[i] = number of index bands contained in bands[0..i]; the gap after bands[i] has IDS below[i]/q.
    std::vector<int> below;
    int flagged = 0;
    bool extended = false;

    double measure() const;
    double e_min() const { return bands.front().lo; }
    double e_max() const { return bands.back().hi; }
};

struct spectrum_options {
    /// Theta samples over [0, 1); 0 means 4q. Only one 1/q period is evaluated since the
    /// spectrum of the periodic operator is invariant under theta -> theta + 1/q.
    int theta_samples = 0;
    /// Merge tolerance for touching bands.
    double e_resolution = 1e-12;
    /// Absolute bisection tolerance for band edges.
    double bisection_tolerance = 1e-13;
    /// Extra theta evaluations allowed per extremal edge search.
    int refine_budget = 48;
    bool extended = false;
    int jobs = 1;
};

/// Interval [-2 - |lambda| sup|f| - 1, 2 + |lambda| sup|f| + 1] used for energy scans.
std::pair<double, double> bracketing_interval(double lambda, const scalar_map& f);

/// Sorted band edges of the theta slice (2q values; index band i is [e[2i], e[2i+1]]).
std::vector<double> slice_edges(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q, double theta,
                                const spectrum_options& opt = {});

band_structure build_band_structure(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q,
                                    const spectrum_options& opt = {});

struct ids_value {
    std::int64_t num = 0, den = 1;
};

ids_value ids(const band_structure& bs, double energy);
ids_value ids(double lambda, const scalar_map& f, std::int64_t p, std::int64_t q, double energy);

struct gap_record {
    std::int64_t m = 0;
    double e_minus = 0, e_plus = 0, width = 0;
    std::int64_t ids_num = 0, ids_den = 1;
    /// Circular distance between {2 rho(E_mid)} (approximant frequency) and {m p/q}.
    double rho_resid = 0;
    /// Same comparison against the irrational frequency, when requested (NaN otherwise).
    double rho_resid_irrational = NAN;
    bool flagged = false;
};

struct label_options {
    /// Use N = 2 rho instead of N = 1 - 2 rho.
    bool opposite_sign = false;
    double tolerance = 1e-4;
    /// Also measure rho with the irrational frequency (Birkhoff iterations below).
    bool irrational_check = false;
    long iterations = 1 << 16;
    int jobs = 1;
};

/// Gap label m with |m| <= q/2 for the IDS j/q.
std::int64_t label_for_ids(std::int64_t j, std::int64_t p, std::int64_t q, bool opposite_sign = false);

std::vector<gap_record> label_gaps(const band_structure& bs, const frequency& freq, const label_options& opt = {});

struct decay_fit {
    double gamma = 0;
    double intercept = 0;
    /// Maximum absolute deviation of ln(width) from the fitted line.
    double residual = 0;
    double rms = 0;
    int points = 0;
    std::vector<std::string> notes;
};

/// Least-squares fit of ln(width) against |m| over all nonzero-width records.
decay_fit gap_decay_fit(const std::vector<gap_record>& records);

struct homogeneity_result {
    double min_ratio = 0;
    double argmin = 0;
    int samples = 0;
};

/// Leb((E - sigma, E + sigma) intersected with the bands) / sigma.
double window_ratio(const band_structure& bs, double energy, double sigma);
homogeneity_result homogeneity_scan(const band_structure& bs, double sigma, int e_samples);

struct window_gap_sum {
    /// Summed measure of gaps inside the window.
    double total = 0;
    /// Label of the lowest-|m| gap meeting the window (0 if none).
    std::int64_t lowest_label = 0;
    /// Gap measure inside the window excluding the lowest-|m| gap.
    double excluding_lowest = 0;
};

window_gap_sum gap_sum_in_window(const std::vector<gap_record>& records, double energy, double sigma);

struct separation_pair {
    std::int64_t m = 0, m2 = 0;
    double distance = 0;
    double rescaled = 0;
};

struct separation_report {
    std::vector<separation_pair> pairs;
    /// Distances of each gap to the spectrum edges (label m2 = 0).
    std::vector<separation_pair> edge_pairs;
    double min_distance = INFINITY;
    double min_rescaled = INFINITY;
    bool all_positive = true;
    double beta = 0;
};

separation_report gap_separation_check(const std::vector<gap_record>& records, double beta,
                                       std::optional<std::pair<double, double>> extent = std::nullopt);

struct holder_report {
    std::vector<double> level_max;
    std::vector<int> level_points;
    double relative_change = 0;
    bool stabilized = false;
};

struct holder_options {
    int levels = 2;
    long iterations = 1 << 15;
    int jobs = 1;
};

/// Max of |rho(E1) - rho(E2)| / |E1 - E2|^{1/2} over all pairs of an energy grid with
/// E_pairs * 2^level points, for each refinement level.
holder_report holder_check(double lambda, const scalar_map& f, double alpha, int e_pairs,
                           const holder_options& opt = {});

} // namespace qps
