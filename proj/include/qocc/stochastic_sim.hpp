#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qocc/params.hpp"

namespace qocc::sim {

struct SimConfig {
    long long n_paths = 100000;
    long long n_steps = 10000;
    std::uint64_t seed = 0;
    Region region = Region::Opposite;
    double start_x = 0.0;
    double start_y = 0.0;
    unsigned threads = 0;  ///< 0 = hardware concurrency; never affects results

    /// Throws PreconditionError unless n_steps >= 100 and n_paths >= 1.
    void validate() const;
};

/// One occupation time per path, each a multiple of 1 / n_steps in [0, 1].
struct OccupationSampleSet {
    std::vector<double> samples;
    SimConfig config;
};

/// Path i uses Philox counters (step, 0, i_lo, i_hi) under the key derived from
/// the seed, one counter per step giving both coordinates' increments. The
/// region is tested at the average of each step's endpoint positions.
OccupationSampleSet simulate(const SimConfig& config);

/// Same paths scored against several regions in one pass. Element j is
/// bit-identical to simulate() with config.region = regions[j].
std::vector<OccupationSampleSet> simulate_multi(const SimConfig& config,
                                                std::span<const Region> regions);

struct MomentEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

/// Sorted samples with CDF and moment queries.
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::span<const double> samples);

    std::size_t size() const noexcept { return sorted_.size(); }
    const std::vector<double>& sorted() const noexcept { return sorted_; }
    /// Fraction of samples <= u (right-continuous).
    double cdf(double u) const;
    /// Sample mean of T^k with its standard error.
    MomentEstimate moment(int k) const;

private:
    std::vector<double> sorted_;
};

struct KsResult {
    double statistic = 0.0;      ///< lattice-corrected distance (see ks_arcsine)
    double raw_statistic = 0.0;  ///< plain sup |F_n - F| over the real line
    double threshold = 0.0;
    bool passed = false;
};

/// One-sample KS distance to the arcsine law at the given level. The samples
/// live on the lattice k / n_steps, so the corrected statistic compares the
/// empirical CDF at k / n_steps with F((k + 1/2) / n_steps), the continuity
/// correction for an occupation time rounded to whole steps.
KsResult ks_arcsine(const OccupationSampleSet& set, double level = 0.01);

struct SymmetryReport {
    double distance = 0.0;   ///< two-sample KS distance between {T_i} and {1 - T_i}
    double threshold = 0.0;  ///< c(level) sqrt(2 / n)
    bool asserted = false;   ///< false when n_paths is too small to test
    bool passed = false;     ///< distance < threshold (meaningful only if asserted)
};

/// Reflection Y -> -Y maps T to 1 - T for the opposite-quadrant region.
SymmetryReport symmetry_check(const OccupationSampleSet& set, double level = 0.01,
                              long long min_paths = 1000);

/// E[1 / (alpha + lambda T)] with its standard error. Requires the opposite
/// region and a start at the origin: only there does Brownian scaling turn the
/// Feynman-Kac functional into a statement about T on [0, 1].
MomentEstimate feynman_kac_estimate(const OccupationSampleSet& set, double alpha, double lambda);

struct BiasRow {
    long long n_steps = 0;
    MomentEstimate mean;
    MomentEstimate second_moment;
    MomentEstimate third_moment;
    double p_quarter = 0.0;   ///< fraction with T <= 1/4
    double reference = 0.0;   ///< exact value of the tracked statistic
    double deviation = 0.0;   ///< tracked statistic - reference
};

struct BiasReport {
    std::vector<BiasRow> rows;
    /// Tracked statistic: P(T <= 1/4) against 1/3 for the half plane, E[T^2]
    /// against the moment oracle otherwise.
    const char* statistic = "";
    /// -slope of log|deviation| against log n_steps (least squares).
    double fitted_order = 0.0;
    bool coupled = false;  ///< levels share one Brownian path per sample
};

/// Tracks the discretization bias over increasing step counts. When every count
/// divides the largest, all levels are read off the same fine paths (the
/// finest level is bit-identical to simulate at that count); otherwise each
/// level is an independent simulate run with the template's seed. Coarse
/// levels in the coupled case may go below the 100-step floor of SimConfig.
BiasReport bias_study(const SimConfig& tmpl, const std::vector<long long>& step_counts);

} // namespace qocc::sim
