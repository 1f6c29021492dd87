#pragma once

#include <functional>
#include <vector>

#include "qocc/params.hpp"

namespace qocc::pde {

/// Square [-L, L]^2 with n nodes per axis; n odd so the origin is a node.
struct GridSpec {
    double half_width = 8.0;
    int n = 513;

    double h() const { return 2.0 * half_width / (n - 1); }
    /// Coordinate of index i, exactly symmetric about the centre index.
    double coord(int i) const { return (i - (n - 1) / 2) * h(); }
    int centre() const { return (n - 1) / 2; }
    void validate() const;
};

enum class BoundaryKind {
    ConstantInvBeta,   ///< U = 1/beta_j on the part of the boundary in quadrant j
    HalfplaneProfile,  ///< U from the 1-D two-medium profile across the nearest axis
};

struct SolveOptions {
    double tol = 1e-10;       ///< relative residual |b - A u| / |b|
    int max_iterations = 0;   ///< 0 means 20 n
    BoundaryKind boundary = BoundaryKind::ConstantInvBeta;
    /// Replaces the piecewise-constant beta(x, y) when set (used to break the
    /// quadrant symmetry on purpose).
    std::function<double(double, double)> beta_override;
    unsigned threads = 0;
};

/// Discrete U on the grid, row-major: values[j * n + i] = U(coord(i), coord(j)).
struct Field {
    GridSpec grid;
    Params params;
    BoundaryKind boundary = BoundaryKind::ConstantInvBeta;
    std::vector<double> values;
    int iterations = 0;
    double residual = 0.0;                 ///< final relative residual
    std::vector<double> residual_history;  ///< initial relative residual, then one per iteration

    double at(int i, int j) const { return values[static_cast<std::size_t>(j) * grid.n + i]; }
};

/// Solves (1/2) Delta_h U - beta U + 1 = 0 on the interior with the 5-point
/// Laplacian and Dirichlet data on the boundary of the square. beta is beta1
/// where x y > 0, beta2 where x y < 0 and (beta1 + beta2)/2 on the axes.
/// Preconditioned conjugate gradients with the diagonal as preconditioner.
/// Throws NonConvergenceError with the residual history when max_iterations
/// is exhausted, PreconditionError when L < 6 / sqrt(2 beta2).
Field solve(const Params& params, const GridSpec& grid, const SolveOptions& opts = {});

/// Dirichlet value at a boundary point for the given kind.
double boundary_value(const Params& params, BoundaryKind kind, double x, double y);

double u_origin(const Field& field);

/// max |U(x,y) - U(y,x)| and |U(x,y) - U(-x,-y)| over the grid.
double symmetry_residual(const Field& field);

struct AxisProfile {
    std::vector<double> y;     ///< nodes on the positive y axis, y >= 0
    std::vector<double> u;     ///< U(0, y)
    std::vector<double> jump;  ///< (U(h,y) - 2 U(0,y) + U(-h,y)) / h: jump of du/dx across x = 0
    /// max |jump| over interior nodes with 0 < y < L (the origin is excluded).
    double max_abs_jump = 0.0;
};

AxisProfile axis_profile(const Field& field);

struct OriginConvergence {
    std::vector<int> n;
    std::vector<double> h;
    std::vector<double> u;
    double observed_order = 0.0;
    double extrapolated = 0.0;
    double error_estimate = 0.0;  ///< |extrapolated - finest value|
};

/// U(0,0) on successively halved grids (e.g. n = 257, 513, 1025) with Richardson
/// extrapolation at the observed order (order 1 if it cannot be measured).
OriginConvergence origin_convergence(const Params& params, double half_width,
                                     const std::vector<int>& sizes, const SolveOptions& opts = {});

} // namespace qocc::pde
