#include "qocc/special_functions.hpp"

#include "qocc/errors.hpp"
#include "qocc/parallel.hpp"
#include "qocc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

namespace qocc::special {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2.0;

// Keep the contour at least kShift / nu below Im t = pi/2. The scaled sum then
// carries an e^{kShift} cancellation factor at most.
constexpr double kShift = 6.0;
// Integrand is dropped once exp(-x cos(theta) (cosh s - 1)) < e^{-kLogCut}.
constexpr double kLogCut = 46.0;
constexpr int kMaxHalvings = 10;

struct LinePlan {
    double theta = 0.0;
    double a = 0.0;  // x cos(theta): decay rate along the line
    double b = 0.0;  // x sin(theta)
    double s_max = 0.0;
    double h0 = 0.0;
};

LinePlan plan_line(double nu, double x)
{
    LinePlan p;
    const double delta_min = nu > 0.0 ? std::min(kHalfPi, kShift / nu) : kHalfPi;
    p.theta = std::max(0.0, std::min(std::asin(std::min(1.0, nu / x)), kHalfPi - delta_min));
    p.a = x * std::cos(p.theta);
    p.b = x * std::sin(p.theta);
    p.s_max = std::acosh(1.0 + kLogCut / p.a);
    p.h0 = std::min({0.25, (kHalfPi - p.theta) / 2.0, 2.0 * kPi / (nu + 30.0)});
    return p;
}

template <class Real>
struct Terms {
    Real sum = 0;
    Real l1 = 0;
    Real phase_l1 = 0;  // sum of amp * |phase|: drives the rounding of cos(phase)
};

// Sum of Re f(s) over s = start + k*step <= s_max, where on the shifted line
// Re f(s) = exp(-a (cosh s - 1)) cos(nu s - b sinh s).
template <class Real>
Terms<Real> line_terms(Real nu, Real a, Real b, Real s_max, Real start, Real step)
{
    Terms<Real> out;
    Real compensation = 0;
    for (long k = 0;; ++k) {
        const Real s = start + step * static_cast<Real>(k);
        if (s > s_max) break;
        const Real e = std::exp(s / 2);
        const Real half = (e - 1 / e) / 2;  // sinh(s/2)
        const Real amp = std::exp(-a * 2 * half * half);
        const Real phase = nu * s - b * 2 * half * ((e + 1 / e) / 2);
        const Real v = amp * std::cos(phase);
        // Neumaier summation.
        const Real t = out.sum + v;
        if (std::abs(out.sum) >= std::abs(v))
            compensation += (out.sum - t) + v;
        else
            compensation += (v - t) + out.sum;
        out.sum = t;
        out.l1 += std::abs(v);
        out.phase_l1 += amp * std::abs(phase);
    }
    out.sum += compensation;
    return out;
}

struct LineIntegral {
    double integral = 0.0;  // int_0^inf Re f(s) ds, without the e^{-nu theta - a} factor
    double change = 0.0;    // |T_h - T_{2h}| at the final level
    double floor = 0.0;     // rounding floor of the final sum
    double h = 0.0;
    LinePlan plan;
    std::vector<double> history;
};

// Step-halving trapezoid. Stops when the change between levels is below
// max(abs_target, rel_target * L1 magnitude, rounding floor). With `geometric`
// set, the change is treated as the error of the coarser sum only: the
// trapezoid error roughly squares per halving, so a relative change c implies
// about c^2 for the finer sum.
LineIntegral integrate_line(double nu, double x, double abs_target, double rel_target,
                            bool geometric = false)
{
    LineIntegral out;
    out.plan = plan_line(nu, x);
    const LinePlan& p = out.plan;
    double h = p.h0;
    const double f0 = 1.0;  // Re f(0) = exp(0) cos(0)
    Terms<double> body = line_terms<double>(nu, p.a, p.b, p.s_max, h, h);
    double total = h * (0.5 * f0 + body.sum);
    double l1 = h * (0.5 + body.l1);
    double phase_l1 = h * body.phase_l1;
    out.history.push_back(total);
    for (int level = 0; level < kMaxHalvings; ++level) {
        const Terms<double> mid = line_terms<double>(nu, p.a, p.b, p.s_max, h / 2.0, h);
        const double refined = 0.5 * total + 0.5 * h * mid.sum;
        l1 = 0.5 * l1 + 0.5 * h * mid.l1;
        phase_l1 = 0.5 * phase_l1 + 0.5 * h * mid.phase_l1;
        h /= 2.0;
        out.change = std::abs(refined - total);
        total = refined;
        out.history.push_back(total);
        const double eps = std::numeric_limits<double>::epsilon();
        out.floor = eps * (l1 + phase_l1);
        const double rel = geometric ? std::sqrt(rel_target) : rel_target;
        if (out.change <= std::max({abs_target, rel * l1, out.floor})) break;
    }
    out.integral = total;
    out.h = h;
    return out;
}

} // namespace

BesselEval k_bessel_imag(double nu, double x, double tol)
{
    if (!(x > 0.0)) throw DomainError("k_bessel_imag: x must be positive");
    if (!(nu >= 0.0)) throw DomainError("k_bessel_imag: nu must be nonnegative");
    if (!(tol > 0.0)) throw PreconditionError("k_bessel_imag: tol must be positive");

    // tol is absolute in K; convert it into line-integral units.
    const LinePlan plan = plan_line(nu, x);
    const double scale = std::exp(-nu * plan.theta - plan.a);
    const LineIntegral line = integrate_line(nu, x, tol / scale, 0.0);

    BesselEval out;
    out.nu = nu;
    out.x = x;
    out.value = scale * line.integral;
    out.abs_error_estimate = scale * (line.change + line.floor);
    if (out.abs_error_estimate == 0.0) out.abs_error_estimate = std::numeric_limits<double>::denorm_min();
    if (out.abs_error_estimate > tol) {
        std::ostringstream msg;
        msg << "k_bessel_imag: tolerance " << tol << " not reached at nu=" << nu << ", x=" << x
            << " (estimate " << out.abs_error_estimate << ")";
        std::vector<double> history;
        for (double t : line.history) history.push_back(scale * t);
        throw NonConvergenceError(msg.str(), out.value, std::move(history));
    }
    return out;
}

double k_bessel_imag_scaled(double nu, double x)
{
    if (!(x > 0.0)) throw DomainError("k_bessel_imag_scaled: x must be positive");
    if (!(nu >= 0.0)) throw DomainError("k_bessel_imag_scaled: nu must be nonnegative");
    const LineIntegral line = integrate_line(nu, x, 0.0, 1e-14, true);
    const LinePlan& p = line.plan;
    return std::exp(nu * (kHalfPi - p.theta) - p.a) * line.integral;
}

double bessel_ode_residual(double nu, double x, double h)
{
    if (!(x > 0.0)) throw DomainError("bessel_ode_residual: x must be positive");
    if (!(h > 0.0)) throw PreconditionError("bessel_ode_residual: h must be positive");
    if (h > x / 4.0) throw PreconditionError("bessel_ode_residual: step h must not exceed x/4");

    // One plan (contour angle, truncation, step) for all three stencil points:
    // the trapezoid sum is then an analytic function of x and the second
    // difference sees no quadrature jitter.
    const LineIntegral probe = integrate_line(nu, x - h, 0.0, 1e-15);
    using Real = long double;
    const LinePlan& p = probe.plan;
    const Real step = static_cast<Real>(probe.h) / 2;
    const Real theta = p.theta;
    auto value_at = [&](Real xx) {
        const Real a = xx * std::cos(theta);
        const Real b = xx * std::sin(theta);
        const Terms<Real> t = line_terms<Real>(nu, a, b, static_cast<Real>(p.s_max), step, step);
        const Real sum = step * (Real(0.5) + t.sum);
        return std::exp(-static_cast<Real>(nu) * theta - a) * sum;
    };
    const Real xl = static_cast<Real>(x);
    const Real hl = static_cast<Real>(h);
    const Real vm = value_at(xl - hl);
    const Real v0 = value_at(xl);
    const Real vp = value_at(xl + hl);
    const Real d1 = (vp - vm) / (2 * hl);
    const Real d2 = (vp - 2 * v0 + vm) / (hl * hl);
    const Real nul = static_cast<Real>(nu);
    return static_cast<double>(xl * xl * d2 + xl * d1 - (xl * xl - nul * nul) * v0);
}

KernelTable::KernelTable(double x, double nu_max, double panel_width, int order)
    : x_(x), nu_max_(nu_max), panel_width_(panel_width), order_(order)
{
    if (!(x > 0.0)) throw DomainError("KernelTable: x must be positive");
    if (!(nu_max > 0.0)) throw PreconditionError("KernelTable: nu_max must be positive");
    const quad::Grid grid = quad::composite_grid(0.0, nu_max, panel_width, order);
    nodes_ = grid.nodes;
    weights_ = grid.weights;
    scaled_.resize(nodes_.size());
    parallel_for(nodes_.size(), [&](std::size_t i) { scaled_[i] = k_bessel_imag_scaled(nodes_[i], x_); });
}

KernelTable::KernelTable(const KernelTable& prefix, double nu_max)
    : x_(prefix.x_), nu_max_(std::max(nu_max, prefix.nu_max_)),
      panel_width_(prefix.panel_width_), order_(prefix.order_)
{
    // Panels of width exactly panel_width starting at 0: node k of panel p is
    // computed by the same expression whatever the table length.
    const quad::Grid grid = quad::composite_grid(0.0, nu_max_, panel_width_, order_);
    nodes_ = grid.nodes;
    weights_ = grid.weights;
    scaled_.resize(nodes_.size());
    const std::size_t reused = std::min(prefix.scaled_.size(), nodes_.size());
    std::copy_n(prefix.scaled_.begin(), reused, scaled_.begin());
    parallel_for(nodes_.size() - reused, [&](std::size_t j) {
        const std::size_t i = reused + j;
        scaled_[i] = k_bessel_imag_scaled(nodes_[i], x_);
    });
}

double KernelTable::integrate(const std::function<double(double)>& damped, double eps,
                              double nu_limit) const
{
    double sum = 0.0;
    double compensation = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const double nu = nodes_[i];
        if (nu_limit >= 0.0 && nu > nu_limit) break;
        const double v = weights_[i] * std::exp(-eps * nu) * damped(nu) * scaled_[i];
        const double t = sum + v;
        compensation += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + compensation;
}

std::shared_ptr<const KernelTable> kernel_table(double x, double nu_max, double panel_width,
                                                int order)
{
    if (!(panel_width > 0.0)) throw PreconditionError("kernel_table: panel width must be positive");
    // Whole panels only, so tables for one x nest.
    nu_max = panel_width * std::ceil(nu_max / panel_width);
    using Key = std::tuple<double, double, int>;
    static std::mutex mutex;
    static std::list<std::pair<Key, std::shared_ptr<const KernelTable>>> cache;
    constexpr std::size_t kCapacity = 32;
    const Key key{x, panel_width, order};
    std::shared_ptr<const KernelTable> shorter;
    {
        std::lock_guard lock(mutex);
        for (auto it = cache.begin(); it != cache.end(); ++it) {
            if (it->first != key) continue;
            cache.splice(cache.begin(), cache, it);
            if (cache.front().second->nu_max() >= nu_max) return cache.front().second;
            shorter = cache.front().second;
            break;
        }
    }
    auto table = shorter ? std::make_shared<const KernelTable>(*shorter, nu_max)
                         : std::make_shared<const KernelTable>(x, nu_max, panel_width, order);
    std::lock_guard lock(mutex);
    for (auto it = cache.begin(); it != cache.end(); ++it) {
        if (it->first == key) {
            cache.erase(it);
            break;
        }
    }
    cache.emplace_front(key, table);
    if (cache.size() > kCapacity) cache.pop_back();
    return table;
}

RegularizedIntegral regularized_kl_integral(double x, const std::function<double(double)>& damped,
                                            const RegularizationOptions& opts)
{
    if (!(x > 0.0)) throw DomainError("regularized_kl_integral: x must be positive");
    if (opts.levels < 2 || !(opts.eps0 > 0.0))
        throw PreconditionError("regularized_kl_integral: need eps0 > 0 and at least two levels");

    RegularizedIntegral out;
    auto cutoff = [&](double eps) {
        const double wanted = 2.0 * x + std::log(1.0 / opts.tail_tol) / eps;
        return opts.panel_width * std::ceil(wanted / opts.panel_width);
    };
    const int top = std::max(opts.levels, opts.max_levels);
    for (int k = 0;; ++k) {
        const double eps = std::ldexp(opts.eps0, -k);
        const double limit = cutoff(eps);
        const auto table = kernel_table(x, limit, opts.panel_width, opts.order);
        out.per_eps.push_back(table->integrate(damped, eps, limit));
        out.smallest_eps = eps;
        out.nu_max = limit;
        if (k + 1 < opts.levels) continue;
        const quad::RichardsonTable rt = quad::richardson(out.per_eps, 2.0, 1.0, 1.0);
        out.value = rt.best();
        out.error_estimate = rt.error_estimate();
        out.converged = out.error_estimate <= opts.converged_tol;
        if (out.converged || k + 1 >= top) break;
    }
    if (!(out.error_estimate <= opts.failure_tol)) {
        std::ostringstream msg;
        msg << "regularized_kl_integral: eps -> 0 extrapolation failed at x=" << x
            << " (successive extrapolants differ by " << out.error_estimate << ")";
        throw NonConvergenceError(msg.str(), out.value, out.per_eps);
    }
    return out;
}

RegularizedIntegral direct_kl_integral(double x, const std::function<double(double)>& damped,
                                       double decay, const DirectOptions& opts)
{
    if (!(x > 0.0)) throw DomainError("direct_kl_integral: x must be positive");
    if (!(decay > 0.0)) throw PreconditionError("direct_kl_integral: decay rate must be positive");
    RegularizedIntegral out;
    // K_{i nu}(x) ~ K_0(x) e^{-nu^2/(2x)} for nu < x and ~ e^{-pi nu/2} beyond, so the
    // cutoff has to grow with x.
    const double wanted = 2.0 * x + opts.log_tail / decay;
    out.nu_max = opts.panel_width * std::ceil(wanted / opts.panel_width);
    const auto coarse = kernel_table(x, out.nu_max, opts.panel_width, 12);
    const auto fine = kernel_table(x, out.nu_max, opts.panel_width, 16);
    const double v12 = coarse->integrate(damped, 0.0, out.nu_max);
    const double v16 = fine->integrate(damped, 0.0, out.nu_max);
    out.per_eps = {v12, v16};
    out.value = v16;
    out.error_estimate = std::abs(v16 - v12);
    out.converged = out.error_estimate <= opts.converged_tol;
    return out;
}

namespace {

IdentityReport make_report(const RegularizedIntegral& integral, double scale, double rhs)
{
    IdentityReport r;
    r.lhs = scale * integral.value;
    r.rhs = rhs;
    r.residual = r.lhs - r.rhs;
    r.quadrature_cutoff = integral.nu_max;
    r.regularization_epsilon = integral.smallest_eps;
    r.converged = integral.converged;
    r.error_estimate = std::abs(scale) * integral.error_estimate;
    for (double v : integral.per_eps) r.refinement_history.push_back(scale * v);
    return r;
}

void require_positive(double v, const char* what)
{
    if (!(v > 0.0)) throw DomainError(std::string(what) + " must be positive");
}

} // namespace

IdentityReport kl_identity_cosh(double y, const RegularizationOptions& opts)
{
    require_positive(y, "kl_identity_cosh: y");
    // cosh(nu pi/2) e^{-pi nu/2} = (1 + e^{-pi nu}) / 2
    auto damped = [](double nu) { return 0.5 * (1.0 + std::exp(-kPi * nu)); };
    return make_report(regularized_kl_integral(y, damped, opts), 2.0 / kPi, 1.0);
}

IdentityReport kl_identity_sine(double z, double y, const RegularizationOptions& opts)
{
    require_positive(z, "kl_identity_sine: z");
    require_positive(y, "kl_identity_sine: y");
    auto damped = [z](double nu) { return std::sin(nu * z) * 0.5 * (-std::expm1(-kPi * nu)); };
    return make_report(regularized_kl_integral(y, damped, opts), 1.0,
                       kHalfPi * std::sin(y * std::sinh(z)));
}

IdentityReport kl_identity_nu_sine(double a, double y, const DirectOptions& opts)
{
    require_positive(y, "kl_identity_nu_sine: y");
    if (!std::isfinite(a)) throw DomainError("kl_identity_nu_sine: a must be real");
    auto damped = [a](double nu) { return nu * std::sin(a * nu) * std::exp(-kHalfPi * nu); };
    // nu e^{-pi nu/2}: use a slightly smaller rate so the polynomial factor is covered.
    IdentityReport r = make_report(direct_kl_integral(y, damped, 1.4, opts), 2.0 / kPi,
                                   y * std::exp(-y * std::cosh(a)) * std::sinh(a));
    r.regularization_epsilon = 0.0;
    return r;
}

double tanh_transform(double y, const DirectOptions& opts)
{
    require_positive(y, "tanh_transform: y");
    auto damped = [](double nu) { return nu * std::tanh(nu * kPi / 4.0) * std::exp(-kHalfPi * nu); };
    return 2.0 / kPi * direct_kl_integral(y, damped, 1.4, opts).value;
}

IdentityReport kl_tanh_probe(double y, const DirectOptions& opts)
{
    require_positive(y, "kl_tanh_probe: y");
    auto damped = [](double nu) { return nu * std::tanh(nu * kPi / 4.0) * std::exp(-kHalfPi * nu); };
    IdentityReport r = make_report(direct_kl_integral(y, damped, 1.4, opts), 2.0 / kPi, y);
    r.regularization_epsilon = 0.0;
    return r;
}

} // namespace qocc::special
