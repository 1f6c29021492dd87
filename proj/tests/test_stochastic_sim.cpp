#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qocc/errors.hpp"
#include "qocc/moment_oracle.hpp"
#include "qocc/normal.hpp"
#include "qocc/philox.hpp"
#include "qocc/stochastic_sim.hpp"

using namespace qocc;
using namespace qocc::sim;

namespace {

SimConfig small(Region region, std::uint64_t seed = 5, long long paths = 20000, long long steps = 1000)
{
    SimConfig c;
    c.n_paths = paths;
    c.n_steps = steps;
    c.seed = seed;
    c.region = region;
    return c;
}

// One shared run per region for the statistical tests.
const OccupationSampleSet& shared(Region region)
{
    static const std::vector<OccupationSampleSet> sets = [] {
        return simulate_multi(small(Region::Opposite, 21, 20000, 1000), kAllRegions);
    }();
    return sets[static_cast<std::size_t>(region)];
}

} // namespace

TEST_CASE("Philox4x32-10 known-answer vectors")
{
    using rng::Philox4x32;
    const auto z = Philox4x32::apply({0, 0, 0, 0}, {0, 0});
    CHECK(z == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    const auto f = Philox4x32::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     {0xffffffffu, 0xffffffffu});
    CHECK(f == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    const auto p = Philox4x32::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
    CHECK(p == Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("uniforms are strictly inside (0, 1)")
{
    CHECK(rng::to_open_unit(0, 0) > 0.0);
    CHECK(rng::to_open_unit(0xffffffffu, 0xffffffffu) < 1.0);
}

TEST_CASE("normal quantile inverts the erfc-based CDF")
{
    for (double p : {1e-300, 1e-12, 1e-5, 0.01, 0.2, 0.5, 0.7, 0.975, 1 - 1e-9}) {
        const double q = rng::normal_quantile(p);
        CAPTURE(p);
        CHECK(oracle::normal_cdf(q) == doctest::Approx(p).epsilon(1e-13));
    }
    CHECK(rng::normal_quantile(0.5) == 0.0);
    CHECK(rng::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-15));
    CHECK(rng::normal_quantile(0.3) == -rng::normal_quantile(0.7));
}

TEST_CASE("config validation")
{
    SimConfig c = small(Region::Opposite);
    c.n_paths = 0;
    CHECK_THROWS_AS(simulate(c), PreconditionError);
    c = small(Region::Opposite);
    c.n_steps = 10;
    CHECK_THROWS_AS(simulate(c), PreconditionError);
}

TEST_CASE("reproducible and independent of thread count")
{
    SimConfig c = small(Region::Opposite, 9, 3000, 400);
    c.threads = 1;
    const auto a = simulate(c);
    const auto b = simulate(c);
    c.threads = 3;
    const auto d = simulate(c);
    CHECK(a.samples == b.samples);
    CHECK(a.samples == d.samples);
    c.seed = 10;
    CHECK(simulate(c).samples != a.samples);
}

TEST_CASE("simulate_multi equals separate runs")
{
    const SimConfig c = small(Region::Opposite, 4, 2000, 300);
    const auto all = simulate_multi(c, kAllRegions);
    for (Region r : kAllRegions) {
        SimConfig one = c;
        one.region = r;
        CHECK(simulate(one).samples == all[static_cast<std::size_t>(r)].samples);
        CHECK(all[static_cast<std::size_t>(r)].config.region == r);
    }
}

TEST_CASE("samples lie on the lattice in [0, 1]; empirical CDF is monotone")
{
    for (Region r : kAllRegions) {
        const auto& s = shared(r);
        for (double t : s.samples) {
            REQUIRE(t >= 0.0);
            REQUIRE(t <= 1.0);
            const double k = t * 1000.0;
            REQUIRE(std::abs(k - std::round(k)) < 1e-9);
        }
        const EmpiricalDistribution d(s.samples);
        double prev = 0.0;
        for (double u = 0.0; u <= 1.0; u += 0.01) {
            CHECK(d.cdf(u) >= prev);
            prev = d.cdf(u);
        }
        CHECK(d.cdf(1.0) == 1.0);
    }
}

TEST_CASE("means within 3 standard errors of 1/2, 1/2, 1/4")
{
    const double expect[3] = {0.5, 0.5, 0.25};
    for (Region r : kAllRegions) {
        const auto m = EmpiricalDistribution(shared(r).samples).moment(1);
        CAPTURE(region_name(r));
        CHECK(std::abs(m.value - expect[static_cast<std::size_t>(r)]) < 3 * m.standard_error);
    }
}

TEST_CASE("second and third moments agree with the oracle")
{
    for (Region r : kAllRegions)
        for (int k : {2, 3}) {
            const auto m = EmpiricalDistribution(shared(r).samples).moment(k);
            CAPTURE(region_name(r));
            CAPTURE(k);
            CHECK(std::abs(m.value - moments::moment(k, r).value) < 3 * m.standard_error);
        }
}

TEST_CASE("EmpiricalDistribution moments on a known sample")
{
    const std::vector<double> xs = {0.0, 0.25, 0.5, 1.0};
    const EmpiricalDistribution d(xs);
    CHECK(d.moment(1).value == doctest::Approx(1.75 / 4));
    CHECK(d.moment(2).value == doctest::Approx((0.0625 + 0.25 + 1.0) / 4));
    const std::vector<double> cst(10, 0.3);
    const auto m = EmpiricalDistribution(cst).moment(1);
    CHECK(m.value == 0.3);
    CHECK(m.standard_error == 0.0);
    CHECK(d.cdf(0.25) == 0.5);
    CHECK(d.cdf(-1.0) == 0.0);
}

TEST_CASE("half-plane occupation follows the arcsine law")
{
    const auto ks = ks_arcsine(shared(Region::HalfPlane));
    CHECK(ks.passed);
    CHECK(ks.statistic < ks.threshold);
    CHECK(ks.threshold == doctest::Approx(moments::ks_threshold(20000, 0.01)));
    CHECK(ks.raw_statistic >= ks.statistic);
    CHECK(std::abs(EmpiricalDistribution(shared(Region::HalfPlane).samples).cdf(0.25) - 1.0 / 3) < 0.01);
    // a law that is clearly not arcsine fails
    const auto& q = shared(Region::SingleQuadrant);
    CHECK_FALSE(ks_arcsine(q).passed);
}

TEST_CASE("symmetry check")
{
    const auto s = symmetry_check(shared(Region::Opposite));
    CHECK(s.asserted);
    CHECK(s.passed);
    CHECK(s.threshold == doctest::Approx(moments::kolmogorov_quantile(0.01) * std::sqrt(2.0 / 20000)));
    CHECK(s.threshold < 1.63 / std::sqrt(20000.0) * std::sqrt(2.0));
    const auto q = symmetry_check(shared(Region::SingleQuadrant));
    CHECK(q.asserted);
    CHECK_FALSE(q.passed);
    const auto tiny = symmetry_check(simulate(small(Region::Opposite, 3, 100, 200)));
    CHECK_FALSE(tiny.asserted);
    CHECK(tiny.distance >= 0.0);
}

TEST_CASE("Feynman-Kac estimate")
{
    const auto& s = shared(Region::Opposite);
    const auto z = feynman_kac_estimate(s, 2.0, 0.0);
    CHECK(z.value == 0.5);
    CHECK(z.standard_error == 0.0);
    double prev = 1.0;
    for (double lambda : {0.5, 1.0, 2.0, 5.0}) {
        const auto e = feynman_kac_estimate(s, 1.0, lambda);
        CHECK(e.value >= 1.0 / (1.0 + lambda));
        CHECK(e.value <= 1.0);
        CHECK(e.value < prev);
        prev = e.value;
    }
    CHECK_THROWS_AS(feynman_kac_estimate(shared(Region::HalfPlane), 1.0, 1.0), PreconditionError);
    SimConfig off = small(Region::Opposite, 1, 200, 200);
    off.start_x = 0.5;
    CHECK_THROWS_AS(feynman_kac_estimate(simulate(off), 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(feynman_kac_estimate(s, 0.0, 1.0), DomainError);
}

TEST_CASE("bias study with coupled paths")
{
    const SimConfig c = small(Region::HalfPlane, 11, 20000, 1024);
    const BiasReport rep = bias_study(c, {16, 64, 256, 1024});
    REQUIRE(rep.rows.size() == 4);
    CHECK(rep.coupled);
    for (const auto& row : rep.rows) CHECK(std::abs(row.mean.value - 0.5) < 3 * row.mean.standard_error);
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        CHECK(std::abs(rep.rows[i].deviation) < std::abs(rep.rows[i - 1].deviation));
    CHECK(rep.fitted_order > 0.5);
    // the finest level is the plain simulation at that step count
    const auto plain = EmpiricalDistribution(simulate(c).samples);
    CHECK(rep.rows.back().p_quarter == plain.cdf(0.25));

    const BiasReport opp = bias_study(small(Region::Opposite, 2, 5000, 1000), {200, 400, 1000});
    CHECK(std::string(opp.statistic) == "E[T^2]");
    CHECK(std::isfinite(opp.fitted_order));
    CHECK_THROWS_AS(bias_study(c, {100, 200}), PreconditionError);
    CHECK_THROWS_AS(bias_study(c, {400, 200, 800}), PreconditionError);
}
