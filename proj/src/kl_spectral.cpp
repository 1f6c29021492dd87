#include "qocc/kl_spectral.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qocc/errors.hpp"
#include "qocc/parallel.hpp"
#include "qocc/quadrature.hpp"

namespace qocc::spectral {

namespace {

constexpr double kPi = std::numbers::pi;

double ratio_sqrt(const Params& p)
{
    if (!(p.beta2() > 0.0)) throw DomainError("phi: beta2 must be positive");
    return std::sqrt(p.beta1() / p.beta2());
}

void require_nonnegative(double z, const char* what)
{
    if (!(z >= 0.0)) throw DomainError(std::string(what) + " must be nonnegative");
}

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
}

// coth(nu pi/2) for nu > 0 without overflow.
double coth_half_pi(double nu)
{
    const double e = std::exp(-kPi * nu);
    return -(1.0 + e) / std::expm1(-kPi * nu);
}

// [sinh(nu (pi/2 - t)) + sinh(nu t)] e^{-pi nu/2} for t in [0, pi/2].
double angular_damped(double nu, double t)
{
    return 0.5 * (std::exp(-nu * t) - std::exp(-nu * (kPi - t)) + std::exp(-nu * (0.5 * kPi - t)) -
                  std::exp(-nu * (0.5 * kPi + t)));
}

} // namespace

double phi(double z, const Params& p)
{
    require_nonnegative(z, "phi: z");
    return warp_map(z, ratio_sqrt(p));
}

double phi_inverse(double zp, const Params& p)
{
    require_nonnegative(zp, "phi_inverse: zp");
    return warp_map(zp, 1.0 / ratio_sqrt(p));
}

double phi_jacobian(double z, const Params& p)
{
    require_nonnegative(z, "phi_jacobian: z");
    return warp_derivative(z, ratio_sqrt(p));
}

Measure pushforward(const Measure& mu2, const Params& p)
{
    return mu2.transported(1.0 / ratio_sqrt(p));
}

Measure mu2_from_mu1(const Measure& mu1, const Params& p)
{
    return mu1.transported(ratio_sqrt(p));
}

SpectralSolution::SpectralSolution(const Params& params, Measure mu1)
    : params_(params), mu1_(std::move(mu1)), mu2_(mu2_from_mu1(mu1_, params))
{
}

const Measure& SpectralSolution::mu(int which) const
{
    if (which == 1) return mu1_;
    if (which == 2) return mu2_;
    throw PreconditionError("quadrant index must be 1 or 2");
}

double SpectralSolution::beta(int which) const
{
    if (which == 1) return params_.beta1();
    if (which == 2) return params_.beta2();
    throw PreconditionError("quadrant index must be 1 or 2");
}

double spectral_density(double nu, int which, const SpectralSolution& sol)
{
    if (!(nu > 0.0)) throw DomainError("spectral_density: nu must be positive (coth pole at 0)");
    const double beta = sol.beta(which);
    return -2.0 / (kPi * beta) * coth_half_pi(nu) + sol.mu(which).sine_transform(nu);
}

VEval v_eval_detail(double r, double theta, const SpectralSolution& sol, const VEvalOptions& opts)
{
    require_positive(r, "v_eval: r");
    if (!std::isfinite(theta)) throw DomainError("v_eval: theta must be finite");
    double t = std::fmod(theta, 2.0 * kPi);
    if (t < 0.0) t += 2.0 * kPi;
    if (t >= kPi) t -= kPi;
    int which = 1;
    if (t > 0.5 * kPi) {
        which = 2;
        t -= 0.5 * kPi;
    }
    const double beta = sol.beta(which);
    const Measure& mu = sol.mu(which);
    const double x = r * std::sqrt(2.0 * beta);
    const double prefactor = -2.0 / (kPi * beta);
    const bool has_measure = !mu.is_zero();
    auto damped = [&](double nu) {
        double f = prefactor * coth_half_pi(nu);
        if (has_measure) f += mu.sine_transform(nu);
        return f * angular_damped(nu, t);
    };

    VEval out;
    const double decay = std::min(t, 0.5 * kPi - t);
    special::RegularizedIntegral integral;
    if (decay >= opts.min_decay) {
        integral = special::direct_kl_integral(x, damped, decay, opts.direct);
    } else {
        integral = special::regularized_kl_integral(x, damped, opts.regularized);
        out.regularized = true;
    }
    out.value = 1.0 / beta + integral.value;
    out.error_estimate = integral.error_estimate;
    out.nu_max = integral.nu_max;
    out.converged = integral.converged;
    return out;
}

double v_eval(double r, double theta, const SpectralSolution& sol, const VEvalOptions& opts)
{
    return v_eval_detail(r, theta, sol, opts).value;
}

double continuity_residual(double r, const SpectralSolution& sol)
{
    require_positive(r, "continuity_residual: r");
    const double a1 = r * std::sqrt(2.0 * sol.params().beta1());
    const double a2 = r * std::sqrt(2.0 * sol.params().beta2());
    const double s1 = sol.mu1().integrate([a1](double z) { return std::sin(a1 * std::sinh(z)); },
                                          Oscillation{0.0, a1});
    const double s2 = sol.mu2().integrate([a2](double z) { return std::sin(a2 * std::sinh(z)); },
                                          Oscillation{0.0, a2});
    return s1 - s2;
}

double pasting_lhs(double r, const Params& p, const Measure& mu1)
{
    require_positive(r, "pasting_lhs: r");
    const double a1 = r * std::sqrt(2.0 * p.beta1());
    const double a2 = r * std::sqrt(2.0 * p.beta2());
    const double k = p.beta1() / p.beta2();
    const double sk = std::sqrt(k);
    // cosh(phi(z)) = sqrt(1 + k sinh^2 z), sinh(phi(z)) = sqrt(k) sinh z.
    auto oscillating = [=](double z) {
        const double sh = std::sinh(z);
        const double cosh_phi = std::sqrt(1.0 + k * sh * sh);
        return std::sin(a1 * sh) * (a1 * std::cosh(z) + a2 * cosh_phi);
    };
    auto decaying = [=](double z) {
        const double sh = std::sinh(z);
        const double cosh_phi = std::sqrt(1.0 + k * sh * sh);
        return a1 * std::exp(-a1 * std::cosh(z)) * sh + a2 * std::exp(-a2 * cosh_phi) * sk * sh;
    };
    const double osc = mu1.integrate(oscillating, Oscillation{0.0, a1});
    const double dec = mu1.integrate(decaying);
    return 0.5 * kPi * (osc + dec);
}

double pasting_rhs(double r, const Params& p, const special::DirectOptions& opts)
{
    require_positive(r, "pasting_rhs: r");
    double rhs = 0.0;
    for (double beta : {p.beta1(), p.beta2()}) {
        const double y = r * std::sqrt(2.0 * beta);
        rhs += -r * std::sqrt(2.0 / beta) + special::tanh_transform(y, opts) / beta;
    }
    return rhs;
}

PastingTerms pasting_terms(double r, const SpectralSolution& sol, const special::DirectOptions& opts)
{
    PastingTerms t;
    t.lhs = pasting_lhs(r, sol.params(), sol.mu1());
    t.rhs = pasting_rhs(r, sol.params(), opts);
    t.residual = t.lhs - t.rhs;
    return t;
}

double pasting_residual(double r, const SpectralSolution& sol, const special::DirectOptions& opts)
{
    return pasting_terms(r, sol, opts).residual;
}

std::vector<double> log_grid(double lo, double hi, int points)
{
    if (!(lo > 0.0) || !(hi > lo) || points < 2)
        throw PreconditionError("log_grid: need 0 < lo < hi and at least two points");
    std::vector<double> g(static_cast<std::size_t>(points));
    const double step = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) g[i] = lo * std::exp(step * i);
    g.back() = hi;
    return g;
}

std::vector<double> default_r_grid() { return log_grid(0.05, 8.0, 40); }

FitResult fit_measure(const Params& p, int basis_size, const std::vector<double>& r_grid,
                      double regularization, const FitOptions& opts)
{
    if (basis_size < 1) throw PreconditionError("fit_measure: basis_size must be positive");
    if (r_grid.size() < static_cast<std::size_t>(basis_size))
        throw PreconditionError("fit_measure: r_grid needs at least basis_size points");
    if (!(regularization >= 0.0)) throw PreconditionError("fit_measure: regularization must be >= 0");
    for (double r : r_grid) require_positive(r, "fit_measure: r");

    const double sigma = opts.sigma > 0.0 ? opts.sigma : opts.support_bound / 20.0;
    const std::vector<double> centers = bump_centers(basis_size, opts.support_bound, sigma);
    const std::size_t m = r_grid.size();
    const std::size_t n = centers.size();

    Eigen::MatrixXd design(m, n);
    Eigen::VectorXd rhs(m);
    parallel_for(m, [&](std::size_t i) { rhs(i) = pasting_rhs(r_grid[i], p); });
    parallel_for(m * n, [&](std::size_t idx) {
        const std::size_t i = idx / n;
        const std::size_t k = idx % n;
        std::vector<double> unit(n, 0.0);
        unit[k] = 1.0;
        const Measure bump = Measure::from_basis(centers, unit, sigma, opts.support_bound);
        design(i, k) = pasting_lhs(r_grid[i], p, bump);
    });

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    FitReport rep;
    rep.r_grid = r_grid;
    rep.regularization = regularization;
    rep.singular_values.assign(s.data(), s.data() + s.size());
    const double smax = s.size() ? s(0) : 0.0;
    const double smin = s.size() ? s(s.size() - 1) : 0.0;
    rep.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    rep.numerical_rank = 0;
    for (int j = 0; j < s.size(); ++j)
        if (s(j) > opts.rank_tol * smax) ++rep.numerical_rank;

    if (regularization == 0.0 && rep.numerical_rank < static_cast<int>(n)) {
        std::ostringstream msg;
        msg << "fit_measure: design matrix is rank-deficient (rank " << rep.numerical_rank << " of "
            << n << ", condition " << rep.condition_number << "); use regularization > 0";
        throw IllConditionedError(msg.str(), rep.condition_number);
    }

    // Tikhonov solution through the SVD filter factors s / (s^2 + reg).
    const Eigen::VectorXd utb = svd.matrixU().transpose() * rhs;
    Eigen::VectorXd filtered(s.size());
    for (int j = 0; j < s.size(); ++j)
        filtered(j) = s(j) > 0.0 ? s(j) * utb(j) / (s(j) * s(j) + regularization) : 0.0;
    const Eigen::VectorXd coeff = svd.matrixV() * filtered;

    const Eigen::VectorXd after = design * coeff - rhs;
    rep.residual_before.resize(m);
    rep.residual_after.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        rep.residual_before[i] = -rhs(i);
        rep.residual_after[i] = after(i);
    }
    rep.residual_norm_before = rhs.norm();
    rep.residual_norm_after = after.norm();
    rep.objective = after.squaredNorm() + regularization * coeff.squaredNorm();

    FitResult out;
    out.measure = Measure::from_basis(centers, std::vector<double>(coeff.data(), coeff.data() + n),
                                      sigma, opts.support_bound);
    out.report = std::move(rep);
    return out;
}

OriginEstimate u_origin_estimate(const SpectralSolution& sol, const std::vector<double>& r_sequence,
                                 const VEvalOptions& opts)
{
    if (r_sequence.size() < 3) throw PreconditionError("u_origin_estimate: need at least 3 radii");
    for (std::size_t i = 0; i < r_sequence.size(); ++i) {
        require_positive(r_sequence[i], "u_origin_estimate: r");
        if (i > 0 && !(r_sequence[i] < r_sequence[i - 1]))
            throw PreconditionError("u_origin_estimate: radii must decrease toward 0");
    }
    OriginEstimate est;
    est.r = r_sequence;
    est.v.resize(r_sequence.size());
    parallel_for(r_sequence.size(),
                 [&](std::size_t i) { est.v[i] = v_eval(r_sequence[i], 0.25 * kPi, sol, opts); });
    int direction = 0;
    for (std::size_t i = 1; i < est.v.size(); ++i) {
        const double d = est.v[i] - est.v[i - 1];
        const int sgn = (d > 0.0) - (d < 0.0);
        if (sgn == 0) continue;
        if (direction != 0 && sgn != direction) {
            throw NonConvergenceError("u_origin_estimate: V(r, pi/4) is not monotone along the "
                                      "r sequence; extrapolation to r = 0 is not meaningful",
                                      est.v.back(), est.v);
        }
        direction = sgn;
    }
    double lower = 0.0;
    est.value = quad::extrapolate_to_zero(est.r, est.v, &lower);
    est.error_estimate = std::abs(est.value - lower);
    return est;
}

} // namespace qocc::spectral
