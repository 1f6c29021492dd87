#include "qocc/stochastic_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qocc/errors.hpp"
#include "qocc/moment_oracle.hpp"
#include "qocc/normal.hpp"
#include "qocc/parallel.hpp"
#include "qocc/philox.hpp"

namespace qocc::sim {

void SimConfig::validate() const
{
    if (n_steps < 100) throw PreconditionError("SimConfig: n_steps must be at least 100");
    if (n_paths < 1) throw PreconditionError("SimConfig: n_paths must be positive");
    if (n_steps > 0xffffffffLL) throw PreconditionError("SimConfig: n_steps exceeds the counter range");
    if (!std::isfinite(start_x) || !std::isfinite(start_y))
        throw PreconditionError("SimConfig: start point must be finite");
}

std::vector<OccupationSampleSet> simulate_multi(const SimConfig& config,
                                                std::span<const Region> regions)
{
    config.validate();
    const std::size_t nr = regions.size();
    std::vector<OccupationSampleSet> out(nr);
    for (std::size_t j = 0; j < nr; ++j) {
        out[j].config = config;
        out[j].config.region = regions[j];
        out[j].samples.resize(static_cast<std::size_t>(config.n_paths));
    }
    const auto key = rng::Philox4x32::key_from_seed(config.seed);
    const double sd = std::sqrt(1.0 / static_cast<double>(config.n_steps));
    const double inv_steps = 1.0 / static_cast<double>(config.n_steps);
    const auto n_steps = static_cast<std::uint32_t>(config.n_steps);

    parallel_for(
        static_cast<std::size_t>(config.n_paths),
        [&](std::size_t path) {
            std::vector<std::uint32_t> hits(nr, 0);
            const auto plo = static_cast<std::uint32_t>(path);
            const auto phi = static_cast<std::uint32_t>(static_cast<std::uint64_t>(path) >> 32);
            double x = config.start_x;
            double y = config.start_y;
            for (std::uint32_t k = 0; k < n_steps; ++k) {
                const auto w = rng::Philox4x32::apply({k, 0u, plo, phi}, key);
                const double nx = x + sd * rng::normal_quantile(rng::to_open_unit(w[0], w[1]));
                const double ny = y + sd * rng::normal_quantile(rng::to_open_unit(w[2], w[3]));
                const double mx = 0.5 * (x + nx);
                const double my = 0.5 * (y + ny);
                for (std::size_t j = 0; j < nr; ++j) hits[j] += in_region(regions[j], mx, my);
                x = nx;
                y = ny;
            }
            for (std::size_t j = 0; j < nr; ++j) out[j].samples[path] = hits[j] * inv_steps;
        },
        config.threads);
    return out;
}

OccupationSampleSet simulate(const SimConfig& config)
{
    const Region r[1] = {config.region};
    return std::move(simulate_multi(config, r).front());
}

EmpiricalDistribution::EmpiricalDistribution(std::span<const double> samples)
    : sorted_(samples.begin(), samples.end())
{
    if (sorted_.empty()) throw PreconditionError("EmpiricalDistribution: no samples");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalDistribution::cdf(double u) const
{
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), u);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

namespace {

// Mean and standard error, accumulated around the first value so that a
// constant sample gives exactly that constant with zero error.
template <class F>
MomentEstimate mean_se(std::span<const double> xs, F&& transform)
{
    const double shift = transform(xs.front());
    double s = 0.0;
    double s2 = 0.0;
    for (double v : xs) {
        const double d = transform(v) - shift;
        s += d;
        s2 += d * d;
    }
    const double n = static_cast<double>(xs.size());
    MomentEstimate m;
    m.value = shift + s / n;
    if (xs.size() > 1) {
        const double var = std::max(0.0, (s2 - s * s / n) / (n - 1.0));
        m.standard_error = std::sqrt(var / n);
    }
    return m;
}

} // namespace

MomentEstimate EmpiricalDistribution::moment(int k) const
{
    if (k < 1) throw PreconditionError("moment: order must be positive");
    return mean_se(sorted_, [k](double t) { return std::pow(t, k); });
}

KsResult ks_arcsine(const OccupationSampleSet& set, double level)
{
    const std::size_t n = set.samples.size();
    const long long steps = set.config.n_steps;
    std::vector<long long> counts(static_cast<std::size_t>(steps) + 1, 0);
    for (double t : set.samples) ++counts[static_cast<std::size_t>(std::llround(t * steps))];

    KsResult out;
    const double nn = static_cast<double>(n);
    long long below = 0;
    for (long long k = 0; k <= steps; ++k) {
        const double lattice = static_cast<double>(k) / static_cast<double>(steps);
        const double before = below / nn;  // F_n just below lattice point k
        below += counts[static_cast<std::size_t>(k)];
        const double at = below / nn;
        const double f_at = moments::arcsine_cdf(lattice);
        out.raw_statistic = std::max({out.raw_statistic, std::abs(at - f_at), std::abs(before - f_at)});
        // F_n is flat on [k/N, (k+1)/N); the rounding-corrected reference is F((k+1/2)/N).
        const double corrected = moments::arcsine_cdf(std::min(1.0, (k + 0.5) / static_cast<double>(steps)));
        out.statistic = std::max(out.statistic, std::abs(at - corrected));
        if (counts[static_cast<std::size_t>(k)] == 0 && k + 1 <= steps) {
            // Flat stretch: also the left end of the next cell.
            const double next = moments::arcsine_cdf(static_cast<double>(k + 1) / steps);
            out.raw_statistic = std::max(out.raw_statistic, std::abs(at - next));
        }
    }
    out.threshold = n >= 30 ? moments::ks_threshold(static_cast<long long>(n), level)
                            : moments::kolmogorov_quantile(level) / std::sqrt(nn);
    out.passed = out.statistic < out.threshold;
    return out;
}

SymmetryReport symmetry_check(const OccupationSampleSet& set, double level, long long min_paths)
{
    const long long steps = set.config.n_steps;
    std::vector<long long> counts(static_cast<std::size_t>(steps) + 1, 0);
    for (double t : set.samples) ++counts[static_cast<std::size_t>(std::llround(t * steps))];
    const double n = static_cast<double>(set.samples.size());
    SymmetryReport rep;
    long long f = 0;
    long long g = 0;
    for (long long k = 0; k <= steps; ++k) {
        f += counts[static_cast<std::size_t>(k)];
        g += counts[static_cast<std::size_t>(steps - k)];  // #{1 - T <= k/N}
        rep.distance = std::max(rep.distance, std::abs(static_cast<double>(f - g)) / n);
    }
    rep.threshold = moments::kolmogorov_quantile(level) * std::sqrt(2.0 / n);
    rep.asserted = static_cast<long long>(set.samples.size()) >= min_paths;
    rep.passed = rep.distance < rep.threshold;
    return rep;
}

MomentEstimate feynman_kac_estimate(const OccupationSampleSet& set, double alpha, double lambda)
{
    const SimConfig& c = set.config;
    if (c.region != Region::Opposite || c.start_x != 0.0 || c.start_y != 0.0)
        throw PreconditionError(
            "feynman_kac_estimate: E[1/(alpha + lambda T)] equals U(0,0) only for the opposite "
            "quadrants (a cone) with the path started at its apex, where Brownian scaling applies");
    if (!(alpha > 0.0) || !(lambda >= 0.0))
        throw DomainError("feynman_kac_estimate: need alpha > 0 and lambda >= 0");
    if (set.samples.empty()) throw PreconditionError("feynman_kac_estimate: no samples");
    return mean_se(set.samples, [=](double t) { return 1.0 / (alpha + lambda * t); });
}

namespace {

// Occupation times of one set of fine paths observed at several coarser
// resolutions: a coarse step of size m/n_fine is the sum of m fine increments,
// so every level sees the same Brownian path (common random numbers).
std::vector<std::vector<double>> coupled_occupation(const SimConfig& config,
                                                    const std::vector<long long>& step_counts)
{
    const long long fine = step_counts.back();
    const std::size_t nl = step_counts.size();
    std::vector<std::uint32_t> block(nl);
    for (std::size_t l = 0; l < nl; ++l) block[l] = static_cast<std::uint32_t>(fine / step_counts[l]);
    std::vector<std::vector<double>> out(nl, std::vector<double>(static_cast<std::size_t>(config.n_paths)));
    const auto key = rng::Philox4x32::key_from_seed(config.seed);
    const double sd = std::sqrt(1.0 / static_cast<double>(fine));
    const auto n_steps = static_cast<std::uint32_t>(fine);

    parallel_for(
        static_cast<std::size_t>(config.n_paths),
        [&](std::size_t path) {
            std::vector<std::uint32_t> hits(nl, 0);
            std::vector<double> bx(nl, config.start_x), by(nl, config.start_y);
            const auto plo = static_cast<std::uint32_t>(path);
            const auto phi = static_cast<std::uint32_t>(static_cast<std::uint64_t>(path) >> 32);
            double x = config.start_x;
            double y = config.start_y;
            for (std::uint32_t k = 0; k < n_steps; ++k) {
                const auto w = rng::Philox4x32::apply({k, 0u, plo, phi}, key);
                x += sd * rng::normal_quantile(rng::to_open_unit(w[0], w[1]));
                y += sd * rng::normal_quantile(rng::to_open_unit(w[2], w[3]));
                for (std::size_t l = 0; l < nl; ++l) {
                    if ((k + 1) % block[l] != 0) continue;
                    hits[l] += in_region(config.region, 0.5 * (bx[l] + x), 0.5 * (by[l] + y));
                    bx[l] = x;
                    by[l] = y;
                }
            }
            for (std::size_t l = 0; l < nl; ++l)
                out[l][path] = hits[l] / static_cast<double>(step_counts[l]);
        },
        config.threads);
    return out;
}

} // namespace

BiasReport bias_study(const SimConfig& tmpl, const std::vector<long long>& step_counts)
{
    if (step_counts.size() < 3) throw PreconditionError("bias_study: need at least 3 step counts");
    for (std::size_t i = 1; i < step_counts.size(); ++i)
        if (step_counts[i] <= step_counts[i - 1])
            throw PreconditionError("bias_study: step counts must increase");
    if (step_counts.front() < 1) throw PreconditionError("bias_study: step counts must be positive");
    bool nested = true;
    for (long long s : step_counts) nested = nested && step_counts.back() % s == 0;
    SimConfig fine = tmpl;
    fine.n_steps = step_counts.back();
    fine.validate();

    std::vector<std::vector<double>> levels;
    if (nested) {
        levels = coupled_occupation(fine, step_counts);
    } else {
        // No common refinement: independent runs sharing only the seed.
        for (long long steps : step_counts) {
            SimConfig c = tmpl;
            c.n_steps = steps;
            levels.push_back(simulate(c).samples);
        }
    }
    BiasReport rep;
    rep.coupled = nested;
    const bool half = tmpl.region == Region::HalfPlane;
    rep.statistic = half ? "P(T <= 1/4)" : "E[T^2]";
    const double reference = half ? 1.0 / 3.0 : moments::moment(2, tmpl.region).value;
    for (std::size_t l = 0; l < step_counts.size(); ++l) {
        const EmpiricalDistribution dist(levels[l]);
        BiasRow row;
        row.n_steps = step_counts[l];
        row.mean = dist.moment(1);
        row.second_moment = dist.moment(2);
        row.third_moment = dist.moment(3);
        row.p_quarter = dist.cdf(0.25);
        row.reference = reference;
        row.deviation = (half ? row.p_quarter : row.second_moment.value) - reference;
        rep.rows.push_back(row);
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int used = 0;
    for (const BiasRow& row : rep.rows) {
        if (row.deviation == 0.0) continue;
        const double lx = std::log(static_cast<double>(row.n_steps));
        const double ly = std::log(std::abs(row.deviation));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++used;
    }
    if (used >= 2) {
        const double slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
        rep.fitted_order = -slope;
    }
    return rep;
}

} // namespace qocc::sim
