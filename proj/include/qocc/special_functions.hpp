#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace qocc::special {

/// K_{i nu}(x) together with the quadrature's own error estimate.
struct BesselEval {
    double nu = 0.0;
    double x = 0.0;
    double value = 0.0;
    double abs_error_estimate = 0.0;
};

/// Modified Bessel function of the second kind with purely imaginary order,
///
///     K_{i nu}(x) = int_0^inf exp(-x cosh t) cos(nu t) dt,   x > 0, nu >= 0.
///
/// The integral is taken along the line Im t = theta, theta in [0, pi/2), which
/// leaves the value unchanged and, with theta close to the saddle of the
/// integrand, avoids the e^{pi nu / 2} cancellation that makes the real-axis
/// integral useless for large nu. On that line the integrand decays doubly
/// exponentially, so the trapezoidal rule converges geometrically; the step is
/// halved until successive sums agree to `tol`.
///
/// Throws DomainError for x <= 0 or nu < 0, and NonConvergenceError (carrying
/// the best estimate) when `tol` is below what double precision can deliver.
BesselEval k_bessel_imag(double nu, double x, double tol = 1e-10);

/// e^{pi nu / 2} K_{i nu}(x), computed without forming either factor. This is
/// O(nu^{-1/2}) for nu >> x and is what every Kontorovich-Lebedev integral
/// below actually consumes. Relative accuracy about 1e-13.
double k_bessel_imag_scaled(double nu, double x);

/// x^2 v'' + x v' - (x^2 - nu^2) v for v = K_{i nu}, derivatives by central
/// differences with step h. All three stencil points share one quadrature plan
/// and are summed in extended precision, so the result measures the difference
/// scheme rather than quadrature noise. Requires 0 < h <= x / 4.
double bessel_ode_residual(double nu, double x, double h);

/// Shared nu-quadrature: composite Gauss-Legendre nodes on [0, nu_max] with
/// the scaled kernel e^{pi nu/2} K_{i nu}(x) tabulated at each node.
class KernelTable {
public:
    KernelTable(double x, double nu_max, double panel_width = 0.5, int order = 12);
    /// Extends `prefix` (same x and panel layout) to nu_max, reusing its values.
    /// Panels are aligned at multiples of panel_width, so shared nodes and their
    /// kernel values are bit-identical to a table built from scratch.
    KernelTable(const KernelTable& prefix, double nu_max);

    double x() const noexcept { return x_; }
    double nu_max() const noexcept { return nu_max_; }
    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<const double> scaled_kernel() const noexcept { return scaled_; }

    /// sum_i w_i e^{-eps nu_i} damped(nu_i) e^{pi nu_i/2} K_{i nu_i}(x), i.e. the
    /// integral of g(nu) K_{i nu}(x) e^{-eps nu} where damped(nu) = g(nu) e^{-pi nu/2}.
    /// Only nodes with nu <= nu_limit contribute (default: the whole table).
    double integrate(const std::function<double(double)>& damped, double eps = 0.0,
                     double nu_limit = -1.0) const;

    double panel_width() const noexcept { return panel_width_; }
    int order() const noexcept { return order_; }

private:
    double x_;
    double nu_max_;
    double panel_width_;
    int order_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> scaled_;
};

/// Process-wide memo of kernel tables keyed by (x, panel layout). Returns a
/// table covering at least [0, nu_max]; integrate with nu_limit = nu_max to get
/// a result that does not depend on what else has been cached.
std::shared_ptr<const KernelTable> kernel_table(double x, double nu_max,
                                                double panel_width = 0.5, int order = 12);

/// Controls for nu-integrals whose integrand decays only algebraically and
/// has to be summed with an e^{-eps nu} regulator.
struct RegularizationOptions {
    double eps0 = 0.8;           ///< largest regulator
    int levels = 6;              ///< initial ladder eps_k = eps0 / 2^k, k < levels
    int max_levels = 8;          ///< ladder is extended one level at a time up to this
    double tail_tol = 1e-7;      ///< e^{-eps nu_max} target for the truncated tail
    double converged_tol = 5e-5; ///< successive extrapolants closer than this => converged
    double failure_tol = 1e-2;   ///< farther apart than this => NonConvergenceError
    double panel_width = 0.5;
    int order = 12;
};

/// Controls for absolutely convergent nu-integrals (integrand ~ e^{-c nu}).
struct DirectOptions {
    double log_tail = 40.0;       ///< integrate until the envelope is e^{-log_tail}
    double converged_tol = 1e-9;  ///< agreement required between two panel orders
    double panel_width = 0.5;
};

struct RegularizedIntegral {
    double value = 0.0;
    double error_estimate = 0.0;
    double nu_max = 0.0;
    double smallest_eps = 0.0;
    bool converged = false;
    std::vector<double> per_eps;  ///< raw regularized values, largest eps first
};

/// Abel-regularized int_0^inf g(nu) K_{i nu}(x) dnu: evaluates the e^{-eps nu}
/// damped integral on the eps ladder and Richardson-extrapolates to eps = 0.
/// `damped` is g(nu) e^{-pi nu/2}, which must stay bounded.
RegularizedIntegral regularized_kl_integral(double x,
                                            const std::function<double(double)>& damped,
                                            const RegularizationOptions& opts = {});

/// int_0^inf g(nu) K_{i nu}(x) dnu for integrands decaying like e^{-decay nu}.
/// `damped` is g(nu) e^{-pi nu/2}.
RegularizedIntegral direct_kl_integral(double x, const std::function<double(double)>& damped,
                                       double decay, const DirectOptions& opts = {});

struct IdentityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;               ///< lhs - rhs
    double quadrature_cutoff = 0.0;      ///< nu_max
    double regularization_epsilon = 0.0; ///< smallest eps used (0 when unregularized)
    bool converged = false;
    double error_estimate = 0.0;
    std::vector<double> refinement_history;
};

/// (2/pi) int cosh(nu pi/2) K_{i nu}(y) dnu against e^{-y cos(pi/2)} = 1.
IdentityReport kl_identity_cosh(double y, const RegularizationOptions& opts = {});

/// int sin(nu z) sinh(nu pi/2) K_{i nu}(y) dnu against (pi/2) sin(y sinh z).
IdentityReport kl_identity_sine(double z, double y, const RegularizationOptions& opts = {});

/// (2/pi) int nu sin(a nu) K_{i nu}(y) dnu against y e^{-y cosh a} sinh a, real a.
IdentityReport kl_identity_nu_sine(double a, double y, const DirectOptions& opts = {});

/// (2/pi) int nu tanh(nu pi/4) K_{i nu}(y) dnu against y. Not an established
/// identity: it is what the axis-derivative pasting condition reduces to when
/// lambda = 0 and both measures vanish, so the residual is reported as-is.
IdentityReport kl_tanh_probe(double y, const DirectOptions& opts = {});

/// The nu-integral in the probe, (2/pi) int nu tanh(nu pi/4) K_{i nu}(y) dnu.
double tanh_transform(double y, const DirectOptions& opts = {});

} // namespace qocc::special
