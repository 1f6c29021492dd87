#pragma once

#include <vector>

#include "qocc/measure.hpp"
#include "qocc/params.hpp"
#include "qocc/special_functions.hpp"

namespace qocc::spectral {

/// Change of variables with sqrt(2 beta1) sinh z = sqrt(2 beta2) sinh(phi(z)),
/// i.e. phi(z) = asinh(sqrt(beta1/beta2) sinh z).
double phi(double z, const Params& p);
double phi_inverse(double zp, const Params& p);
/// d phi / dz = sqrt(k) cosh z / sqrt(k sinh^2 z + 1), k = beta1 / beta2.
double phi_jacobian(double z, const Params& p);

/// mu2 -> mu1: an atom of mu2 at u becomes an atom of mu1 at phi^{-1}(u) with the same weight.
Measure pushforward(const Measure& mu2, const Params& p);
/// mu1 -> mu2, the image of mu1 under phi.
Measure mu2_from_mu1(const Measure& mu1, const Params& p);

/// Quadrant-wise spectral ansatz. mu2 is always derived from mu1.
class SpectralSolution {
public:
    SpectralSolution(const Params& params, Measure mu1);

    const Params& params() const noexcept { return params_; }
    const Measure& mu1() const noexcept { return mu1_; }
    const Measure& mu2() const noexcept { return mu2_; }
    const Measure& mu(int which) const;
    double beta(int which) const;

private:
    Params params_;
    Measure mu1_;
    Measure mu2_;
};

/// f_j(nu) = (2/pi) coth(nu pi/2) (-1/beta_j) + int sin(nu z) mu_j(dz), nu > 0.
double spectral_density(double nu, int which, const SpectralSolution& sol);

struct VEvalOptions {
    special::DirectOptions direct;
    special::RegularizationOptions regularized;
    /// Below this decay rate of the nu-integrand (close to an axis) the
    /// integral is summed with the e^{-eps nu} regulator instead.
    double min_decay = 0.1;
};

struct VEval {
    double value = 0.0;
    double error_estimate = 0.0;
    double nu_max = 0.0;
    bool regularized = false;
    bool converged = false;
};

/// V(r, theta) from the quadrant formula with g_j = f_j; the third and fourth
/// quadrants use V(r, theta) = V(r, theta - pi). Axes take the one-sided value
/// from the quadrant on the counter-clockwise side (theta = pi/2 uses Q1).
VEval v_eval_detail(double r, double theta, const SpectralSolution& sol,
                    const VEvalOptions& opts = {});
double v_eval(double r, double theta, const SpectralSolution& sol, const VEvalOptions& opts = {});

/// int sin(r sqrt(2 beta1) sinh z) mu1(dz) - int sin(r sqrt(2 beta2) sinh z) mu2(dz).
double continuity_residual(double r, const SpectralSolution& sol);

struct PastingTerms {
    double lhs = 0.0;       ///< measure part, linear in mu1
    double rhs = 0.0;       ///< sum_j [-r sqrt(2/beta_j) + T(r sqrt(2 beta_j)) / beta_j]
    double residual = 0.0;  ///< lhs - rhs
};

/// Measure part of the derivative-pasting equation for a given mu1.
double pasting_lhs(double r, const Params& p, const Measure& mu1);
/// Measure-free part; T is special::tanh_transform.
double pasting_rhs(double r, const Params& p, const special::DirectOptions& opts = {});
PastingTerms pasting_terms(double r, const SpectralSolution& sol,
                           const special::DirectOptions& opts = {});
double pasting_residual(double r, const SpectralSolution& sol,
                        const special::DirectOptions& opts = {});

/// 40 log-spaced radii on [0.05, 8].
std::vector<double> default_r_grid();
std::vector<double> log_grid(double lo, double hi, int points);

struct FitOptions {
    double support_bound = 10.0;
    double sigma = 0.0;  ///< bump width; 0 means support_bound / 20
    /// Relative singular-value cutoff used to declare the unregularized design
    /// rank-deficient.
    double rank_tol = 1e-12;
};

struct FitReport {
    std::vector<double> r_grid;
    std::vector<double> residual_before;  ///< pasting residual with mu1 = 0
    std::vector<double> residual_after;
    double residual_norm_before = 0.0;
    double residual_norm_after = 0.0;
    double objective = 0.0;  ///< |residual|^2 + reg |c|^2
    double regularization = 0.0;
    std::vector<double> singular_values;
    double condition_number = 0.0;
    int numerical_rank = 0;
};

struct FitResult {
    Measure measure;  ///< fitted mu1 as a bump expansion
    FitReport report;
};

/// Least squares for the bump coefficients of mu1 minimizing
/// sum_r pasting_residual(r)^2 + regularization |c|^2. Throws
/// IllConditionedError when regularization = 0 and the design is rank-deficient.
FitResult fit_measure(const Params& p, int basis_size, const std::vector<double>& r_grid,
                      double regularization, const FitOptions& opts = {});

struct OriginEstimate {
    double value = 0.0;
    double error_estimate = 0.0;
    std::vector<double> r;
    std::vector<double> v;
};

/// V(r, pi/4) on a decreasing r sequence, polynomially extrapolated to r = 0.
/// Throws NonConvergenceError if the sampled values are not monotone in r.
OriginEstimate u_origin_estimate(const SpectralSolution& sol, const std::vector<double>& r_sequence,
                                 const VEvalOptions& opts = {});

} // namespace qocc::spectral
