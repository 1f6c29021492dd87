#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qocc::quad {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule; results are cached per n and thread-safe.
const GaussRule& gauss_legendre(int n);

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive 7/15-point Gauss-Kronrod on [a, b]. Bisects the interval
/// with the largest error estimate until the summed estimate drops below
/// max(abs_tol, rel_tol * |value|) or max_intervals is reached. Deterministic.
Result integrate_adaptive(const Integrand& f, double a, double b, double abs_tol,
                          double rel_tol = 0.0, int max_intervals = 2000);

/// Same on [a, inf) via t = a + u / (1 - u).
Result integrate_adaptive_inf(const Integrand& f, double a, double abs_tol,
                              double rel_tol = 0.0, int max_intervals = 2000);

/// Composite Gauss-Legendre with fixed panels of width <= panel_width.
double integrate_panels(const Integrand& f, double a, double b, double panel_width,
                        int order = 12);

/// Nodes and weights for a composite Gauss-Legendre rule on [a, b]. Used when the
/// same quadrature grid is shared by several integrands.
struct Grid {
    std::vector<double> nodes;
    std::vector<double> weights;
};
Grid composite_grid(double a, double b, double panel_width, int order = 12);

/// Richardson tableau for values A(h_k) with h_k = h_0 / ratio^k whose error
/// expands as c_1 h^{p} + c_2 h^{p + step} + ...
struct RichardsonTable {
    /// rows[j][i]: j eliminations applied, starting from value index i.
    std::vector<std::vector<double>> rows;

    double best() const { return rows.back().front(); }
    /// Change between the two most-eliminated estimates.
    double error_estimate() const;
};

RichardsonTable richardson(std::span<const double> values, double ratio,
                           double first_order = 1.0, double order_step = 1.0);

/// Neville extrapolation of (x_i, y_i) to x = 0. Returns the polynomial
/// extrapolant through all points and, in `lower_order`, the value through
/// all but the point farthest from zero.
double extrapolate_to_zero(std::span<const double> x, std::span<const double> y,
                           double* lower_order = nullptr);

} // namespace qocc::quad
