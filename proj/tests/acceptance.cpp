// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qocc/errors.hpp"
#include "qocc/kl_spectral.hpp"
#include "qocc/moment_oracle.hpp"
#include "qocc/pde_solver.hpp"
#include "qocc/special_functions.hpp"
#include "qocc/stochastic_sim.hpp"
#include "qocc_cli.hpp"

using namespace qocc;
namespace fs = std::filesystem;
using std::numbers::pi;
using Clock = std::chrono::steady_clock;

namespace {

std::string format(const char* fmt, auto... args)
{
    if constexpr (sizeof...(args) == 0) {
        return fmt;
    } else {
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        return buf;
    }
}

struct Criterion {
    int id;
    std::string title;
    bool pass = true;
    double seconds = 0.0;
    double budget = 0.0;  // 0: no runtime limit
    std::vector<std::string> lines;

    void check(bool ok, const char* fmt, auto... args)
    {
        lines.push_back(std::string(ok ? "  ok    " : "  FAIL  ") + format(fmt, args...));
        pass = pass && ok;
    }
    void note(const char* fmt, auto... args)
    {
        lines.push_back(std::string("  info  ") + format(fmt, args...));
    }
};

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<Criterion> results;

void report(Criterion& c)
{
    if (c.budget > 0.0) c.check(c.seconds <= c.budget, "runtime %.1f s <= %.0f s", c.seconds, c.budget);
    std::printf("criterion %d: %s  %s  (%.1f s)\n", c.id, c.pass ? "PASS" : "FAIL", c.title.c_str(), c.seconds);
    for (const auto& l : c.lines) std::printf("%s\n", l.c_str());
    std::fflush(stdout);
    results.push_back(c);
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

int run(std::vector<std::string> args, std::string* out = nullptr)
{
    args.insert(args.begin(), "qocc");
    std::ostringstream o, e;
    const int code = cli::run_cli(args, o, e);
    if (out) *out = o.str();
    return code;
}

} // namespace

int main()
{
    // One simulation pass at full size shared by criteria 1, 2 and 4.
    sim::SimConfig cfg;
    cfg.n_paths = 100000;
    cfg.n_steps = 10000;
    cfg.seed = 7;
    const auto t_sim = Clock::now();
    const auto sets = sim::simulate_multi(cfg, kAllRegions);
    const double sim_seconds = since(t_sim);
    auto set_of = [&](Region r) -> const sim::OccupationSampleSet& { return sets[static_cast<std::size_t>(r)]; };
    std::printf("shared Monte Carlo pass: %lld paths x %lld steps, seed %llu, 3 regions, %.1f s\n",
                cfg.n_paths, cfg.n_steps, static_cast<unsigned long long>(cfg.seed), sim_seconds);

    {
        Criterion c{1, "arcsine control case (half plane)"};
        c.budget = 120.0;
        const auto t0 = Clock::now();
        const auto& hp = set_of(Region::HalfPlane);
        const auto ks = sim::ks_arcsine(hp, 0.01);
        c.check(ks.passed, "KS distance %.5f < 1%% threshold %.5f (raw sup distance incl. lattice %.5f)",
                ks.statistic, ks.threshold, ks.raw_statistic);
        const double pq = sim::EmpiricalDistribution(hp.samples).cdf(0.25);
        c.check(std::abs(pq - 1.0 / 3) < 0.01, "P(T <= 1/4) = %.5f, |. - 1/3| = %.5f < 0.01", pq,
                std::abs(pq - 1.0 / 3));
        c.seconds = since(t0) + sim_seconds;
        report(c);
    }
    {
        Criterion c{2, "oracle moments vs Monte Carlo, all regions, orders 1-3"};
        c.budget = 300.0;
        const auto t0 = Clock::now();
        const double first[3] = {0.5, 0.5, 0.25};
        for (Region r : kAllRegions) {
            const sim::EmpiricalDistribution d(set_of(r).samples);
            const double m1 = moments::moment(1, r).value;
            c.check(m1 == first[static_cast<std::size_t>(r)], "%-15s oracle E[T] = %.17g (exact %.2f)",
                    std::string(region_name(r)).c_str(), m1, first[static_cast<std::size_t>(r)]);
            for (int k = 1; k <= 3; ++k) {
                const auto o = moments::moment(k, r);
                const auto mc = d.moment(k);
                const double z = (mc.value - o.value) / mc.standard_error;
                c.check(std::abs(z) < 3.0, "%-15s k=%d oracle %.9f  MC %.6f +- %.6f  z = %+.2f",
                        std::string(region_name(r)).c_str(), k, o.value, mc.value, mc.standard_error, z);
            }
        }
        c.seconds = since(t0) + sim_seconds;
        report(c);
    }
    {
        Criterion c{3, "Bessel / Kontorovich-Lebedev identity suite"};
        c.budget = 60.0;
        const auto t0 = Clock::now();
        double worst_cosh = 0, worst_sine = 0, worst_nu = 0;
        bool all_ok = true;
        for (double y : {0.1, 0.5, 1.0, 2.0, 5.0}) {
            try {
                worst_cosh = std::max(worst_cosh, std::abs(special::kl_identity_cosh(y).residual));
                for (double z : {0.1, 0.5, 1.0}) {
                    worst_sine = std::max(worst_sine, std::abs(special::kl_identity_sine(z, y).residual));
                    worst_nu = std::max(worst_nu, std::abs(special::kl_identity_nu_sine(z, y).residual));
                }
            } catch (const std::exception& e) {
                all_ok = false;
                c.note("y = %g: %s", y, e.what());
            }
        }
        c.check(all_ok, "all identities evaluated without non-convergence");
        c.check(worst_cosh < 1e-3, "max |cosh identity - 1| = %.3g < 1e-3", worst_cosh);
        c.check(worst_sine < 1e-3, "max |sine identity residual| = %.3g < 1e-3", worst_sine);
        c.check(worst_nu < 1e-3, "max |nu-sine identity residual| = %.3g < 1e-3", worst_nu);
        const double hs[3] = {1e-2, 1e-3, 1e-4};
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (double h : hs) {
            const double X = std::log(h), Y = std::log(std::abs(special::bessel_ode_residual(0.0, 2.0, h)));
            sx += X, sy += Y, sxx += X * X, sxy += X * Y;
        }
        const double order = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
        c.check(order >= 1.9, "Bessel ODE residual order %.3f >= 1.9 (nu = 0, x = 2)", order);
        c.seconds = since(t0);
        report(c);
    }
    {
        Criterion c{4, "cross-route U(0,0) at alpha = lambda = 1: PDE vs Monte Carlo"};
        c.budget = 300.0;
        const auto t0 = Clock::now();
        const Params p(1.0, 1.0);
        const auto oc = pde::origin_convergence(p, 8.0, {257, 513, 1025});
        const double u_pde = oc.u.back();
        const double pde_err = oc.error_estimate;
        const auto fk = sim::feynman_kac_estimate(set_of(Region::Opposite), 1.0, 1.0);
        const double diff = std::abs(u_pde - fk.value);
        const double tol = std::max(2 * fk.standard_error, 2 * pde_err);
        c.note("PDE n = 257/513/1025: %.9f %.9f %.9f, observed order %.3f, extrapolated %.9f", oc.u[0], oc.u[1],
               oc.u[2], oc.observed_order, oc.extrapolated);
        c.check(diff < tol, "|PDE %.6f - MC %.6f| = %.2e < max(2 SE %.2e, 2 Richardson %.2e)", u_pde, fk.value, diff,
                2 * fk.standard_error, 2 * pde_err);
        c.check(u_pde >= 0.5 && u_pde <= 1.0, "PDE value in [1/2, 1]");
        c.check(fk.value >= 0.5 && fk.value <= 1.0, "MC value in [1/2, 1]");
        try {
            const auto fit = spectral::fit_measure(p, 8, spectral::default_r_grid(), 1e-8);
            const auto est = spectral::u_origin_estimate(spectral::SpectralSolution(p, fit.measure),
                                                         {0.4, 0.2, 0.1, 0.05});
            c.note("spectral route (8 bumps, pasting residual norm %.3g): %.4f +- %.4f", fit.report.residual_norm_after,
                   est.value, est.error_estimate);
        } catch (const std::exception& e) {
            c.note("spectral route unavailable: %s", e.what());
        }
        c.seconds = since(t0) + sim_seconds;
        report(c);
    }
    {
        Criterion c{5, "lambda = 0 degenerate suite"};
        const auto t0 = Clock::now();
        for (double alpha : {1.0, 2.0}) {
            const auto f = pde::solve(Params(alpha, 0.0), {8.0, 129});
            bool exact = true;
            for (double v : f.values) exact = exact && v == 1.0 / alpha;
            c.check(exact, "PDE field == 1/alpha at every node (alpha = %g)", alpha);
        }
        const Params flat(1.0, 0.0);
        double worst_phi = 0;
        for (double z = 0; z <= 20; z += 0.25) worst_phi = std::max(worst_phi, std::abs(spectral::phi(z, flat) - z));
        c.check(worst_phi <= 1e-14 * 20, "phi = identity, max |phi(z) - z| = %.2e on [0, 20]", worst_phi);
        const auto atoms = spectral::Measure::from_atoms({{0.4, 1.5}, {1.3, -0.7}});
        const auto pa = spectral::pushforward(atoms, flat);
        bool same = pa.atoms().size() == 2;
        for (std::size_t k = 0; same && k < 2; ++k)
            same = std::abs(pa.atoms()[k].z - atoms.atoms()[k].z) <= 1e-15 && pa.atoms()[k].w == atoms.atoms()[k].w;
        const auto bumps = spectral::Measure::from_basis({1.0, 2.5}, {0.3, -0.2}, 0.5);
        const auto pb = spectral::pushforward(bumps, flat);
        same = same && pb.warp() == 1.0 && pb.coefficients() == bumps.coefficients();
        c.check(same, "pushforward = identity (atoms and bumps)");
        const auto fit = spectral::fit_measure(flat, 8, spectral::default_r_grid(), 1e-8);
        double cmax = 0;
        for (double v : fit.measure.coefficients()) cmax = std::max(cmax, std::abs(v));
        c.check(cmax < 1e-6, "fitted coefficients < 1e-6: max |c| = %.4g (pasting residual norm %.4g -> %.4g)", cmax,
                fit.report.residual_norm_before, fit.report.residual_norm_after);
        const spectral::SpectralSolution zero(flat, spectral::Measure{});
        for (double r : {0.5, 1.0, 2.0}) {
            const double v = spectral::v_eval(r, pi / 4, zero);
            c.check(std::abs(v - 1.0) < 1e-3, "v_eval(r = %g, pi/4) = %.6f vs 1/alpha = 1", r, v);
        }
        c.note("with mu = 0 the tanh probe gives (2/pi) int nu tanh(nu pi/4) K dnu = %.6f at y = 1, not 1",
               special::tanh_transform(1.0));
        c.seconds = since(t0);
        report(c);
    }
    {
        Criterion c{6, "pasting machinery consistency"};
        const auto t0 = Clock::now();
        double worst = 0;
        for (double lambda : {0.5, 1.0, 3.0}) {
            const Params p(1.0, lambda);
            for (const auto& mu : {spectral::Measure::from_atoms({{0.4, 1.5}, {1.3, -0.7}, {3.0, 0.2}}),
                                   spectral::Measure::from_basis({1.0, 2.5, 4.0}, {0.3, -0.2, 0.05}, 0.5)})
                for (double r : {0.1, 1.0, 10.0})
                    worst = std::max(worst, std::abs(spectral::continuity_residual(
                                                r, spectral::SpectralSolution(p, spectral::pushforward(mu, p)))));
        }
        c.check(worst < 1e-12, "continuity residual max %.2e < 1e-12 (atoms and bumps, r = 0.1, 1, 10)", worst);

        const Params p(1.0, 1.0);
        const auto m = spectral::Measure::from_basis({1.0, 2.5, 4.0}, {0.3, -0.2, 0.05}, 0.5);
        const auto n = spectral::Measure::from_basis({1.0, 2.5, 4.0}, {-0.1, 0.6, 0.2}, 0.5);
        const double a = 0.7, b = -1.9;
        double lin = 0;
        for (double r : {0.2, 1.0, 3.0}) {
            const double base = spectral::pasting_residual(r, spectral::SpectralSolution(p, spectral::Measure{}));
            const double rm = spectral::pasting_residual(r, spectral::SpectralSolution(p, m)) - base;
            const double rn = spectral::pasting_residual(r, spectral::SpectralSolution(p, n)) - base;
            const double rmn =
                spectral::pasting_residual(r, spectral::SpectralSolution(p, m.combined(a, n, b))) - base;
            lin = std::max(lin, std::abs(rmn - (a * rm + b * rn)) / (1 + std::abs(rm) + std::abs(rn)));
        }
        c.check(lin < 1e-11, "pasting residual minus its mu = 0 value is linear in mu1: rel. defect %.2e", lin);
        double prev = INFINITY;
        bool mono = true;
        std::string norms;
        for (int k : {4, 8, 16, 32}) {
            const double nrm = spectral::fit_measure(p, k, spectral::default_r_grid(), 1e-8).report.residual_norm_after;
            mono = mono && nrm <= prev;
            prev = nrm;
            norms += " " + std::to_string(k) + ":" + std::to_string(nrm);
        }
        c.check(mono, "fit residual norm non-increasing in basis size:%s", norms.c_str());
        c.seconds = since(t0);
        report(c);
    }
    {
        Criterion c{7, "tanh probe reported (informational) in verify-identities"};
        const auto t0 = Clock::now();
        for (double y : {0.5, 1.0, 2.0}) {
            const auto rep = special::kl_tanh_probe(y);
            c.note("y = %g: lhs %.9f, rhs %g, residual %+.6f", y, rep.lhs, rep.rhs, rep.residual);
        }
        const fs::path dir = fs::temp_directory_path() / "qocc_acceptance_probe";
        std::string out;
        run({"verify-identities", "--y-grid", "1", "--z-grid", "0.5", "--probe-y", "0.5,1,2", "--out", dir.string()},
            &out);
        int probes = 0, marked = 0;
        std::istringstream lines(out);
        std::string line;
        while (std::getline(lines, line))
            if (line.rfind("kl_tanh_probe", 0) == 0) {
                ++probes;
                marked += line.size() >= 4 && line.substr(line.size() - 4) != "INFO";
            }
        c.check(probes == 3 && marked == 0, "verify-identities lists %d probe rows, all INFO", probes);
        c.seconds = since(t0);
        report(c);
    }
    {
        Criterion c{8, "determinism: identical flags give byte-identical primary outputs"};
        const auto t0 = Clock::now();
        const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> commands = {
            {{"simulate", "--region", "opposite", "--paths", "20000", "--steps", "1000", "--seed", "7", "--alpha", "1",
              "--lambda", "1"},
             {"samples.csv", "summary.json", "manifest.json"}},
            {{"pde", "--alpha", "1", "--lambda", "1", "--n", "129"}, {"field.csv", "axis_profile.csv", "summary.json"}},
            {{"verify-identities", "--y-grid", "0.5,2", "--z-grid", "0.5"}, {"identities.csv", "summary.json"}},
            {{"pasting-fit", "--alpha", "1", "--lambda", "1", "--basis-size", "8"},
             {"measure.json", "residuals.csv", "summary.json"}},
            {{"moments", "--region", "single-quadrant", "--mc-check", "--paths", "5000", "--steps", "500"},
             {"moments.csv", "summary.json"}},
        };
        for (const auto& [args, files] : commands) {
            const fs::path d1 = fs::temp_directory_path() / ("qocc_acceptance_" + args[0] + "_1");
            const fs::path d2 = fs::temp_directory_path() / ("qocc_acceptance_" + args[0] + "_2");
            fs::remove_all(d1);
            fs::remove_all(d2);
            auto a1 = args, a2 = args;
            a1.insert(a1.end(), {"--out", d1.string()});
            a2.insert(a2.end(), {"--out", d2.string()});
            std::string o1, o2;
            const int c1 = run(a1, &o1), c2 = run(a2, &o2);
            bool same = c1 == c2 && o1 == o2;
            for (const auto& f : files) same = same && fs::exists(d1 / f) && slurp(d1 / f) == slurp(d2 / f);
            c.check(same, "%-17s exit %d, stdout and %zu files identical", args[0].c_str(), c1, files.size());
        }
        c.seconds = since(t0);
        report(c);
    }

    int failed = 0;
    for (const auto& c : results) failed += !c.pass;
    std::printf("summary: %zu criteria, %d passed, %d failed\n", results.size(),
                static_cast<int>(results.size()) - failed, failed);
    return failed == 0 ? 0 : 1;
}
