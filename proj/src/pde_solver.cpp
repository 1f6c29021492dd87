#include "qocc/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qocc/errors.hpp"
#include "qocc/parallel.hpp"

namespace qocc::pde {

void GridSpec::validate() const
{
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw PreconditionError("GridSpec: half width must be positive");
    if (n < 5 || n % 2 == 0) throw PreconditionError("GridSpec: n must be odd and at least 5");
}

namespace {

double quadrant_beta(const Params& p, double x, double y)
{
    const double s = x * y;
    if (s > 0.0) return p.beta1();
    if (s < 0.0) return p.beta2();
    return 0.5 * (p.beta1() + p.beta2());
}

// Row-blocked sum with a fixed combination order, independent of thread count.
template <class RowFn>
double reduce_rows(int rows, RowFn&& row, unsigned threads)
{
    std::vector<double> partial(static_cast<std::size_t>(rows));
    parallel_for(static_cast<std::size_t>(rows), [&](std::size_t j) { partial[j] = row(static_cast<int>(j)); },
                 threads);
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

} // namespace

double boundary_value(const Params& p, BoundaryKind kind, double x, double y)
{
    const double b1 = p.beta1();
    const double b2 = p.beta2();
    if (kind == BoundaryKind::ConstantInvBeta) {
        const double s = x * y;
        if (s > 0.0) return 1.0 / b1;
        if (s < 0.0) return 1.0 / b2;
        return 0.5 * (1.0 / b1 + 1.0 / b2);
    }
    // Two media meeting at the axis nearer to the point: the bounded solution of
    // u''/2 - beta u + 1 = 0 on each side with u, u' continuous at the interface.
    const double d = std::min(std::abs(x), std::abs(y));
    const double s = x * y;
    const double bt = s >= 0.0 ? b1 : b2;
    const double bo = s >= 0.0 ? b2 : b1;
    const double kt = std::sqrt(2.0 * bt);
    const double ko = std::sqrt(2.0 * bo);
    return 1.0 / bt + (1.0 / bo - 1.0 / bt) * ko / (kt + ko) * std::exp(-kt * d);
}

Field solve(const Params& params, const GridSpec& grid, const SolveOptions& opts)
{
    grid.validate();
    if (!(opts.tol > 0.0)) throw PreconditionError("solve: tol must be positive");
    const double min_width = 6.0 / std::sqrt(2.0 * params.beta2());
    if (grid.half_width < min_width) {
        std::ostringstream msg;
        msg << "solve: half width " << grid.half_width << " is below 6/sqrt(2 beta2) = " << min_width;
        throw PreconditionError(msg.str());
    }
    const int n = grid.n;
    const double h = grid.h();
    const double inv_h2 = 1.0 / (h * h);
    const std::size_t N = static_cast<std::size_t>(n) * n;
    auto idx = [n](int i, int j) { return static_cast<std::size_t>(j) * n + i; };

    std::vector<double> beta(N);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = grid.coord(i);
            const double y = grid.coord(j);
            beta[idx(i, j)] = opts.beta_override ? opts.beta_override(x, y) : quadrant_beta(params, x, y);
        }

    Field f;
    f.grid = grid;
    f.params = params;
    f.boundary = opts.boundary;
    f.values.assign(N, 0.0);
    std::vector<double> rhs(N, 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const bool edge = i == 0 || j == 0 || i == n - 1 || j == n - 1;
            const double x = grid.coord(i);
            const double y = grid.coord(j);
            f.values[idx(i, j)] = edge ? boundary_value(params, opts.boundary, x, y) : 1.0 / beta[idx(i, j)];
        }
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) {
            double b = 1.0;
            auto add = [&](int a, int c) {
                if (a == 0 || c == 0 || a == n - 1 || c == n - 1) b += 0.5 * inv_h2 * f.values[idx(a, c)];
            };
            add(i - 1, j);
            add(i + 1, j);
            add(i, j - 1);
            add(i, j + 1);
            rhs[idx(i, j)] = b;
        }

    // A u on the interior with zero boundary entries in u.
    auto apply = [&](const std::vector<double>& u, std::vector<double>& out, int j) {
        for (int i = 1; i < n - 1; ++i) {
            const std::size_t p = idx(i, j);
            const double nb = (u[p - 1] + u[p + 1]) + (u[p - n] + u[p + n]);
            out[p] = (2.0 * inv_h2 + beta[p]) * u[p] - 0.5 * inv_h2 * nb;
        }
    };

    // Unknowns live in x (interior) with boundary slots held at zero.
    std::vector<double> x(N, 0.0), r(N, 0.0), z(N, 0.0), p(N, 0.0), q(N, 0.0);
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) x[idx(i, j)] = f.values[idx(i, j)];
    parallel_for(static_cast<std::size_t>(n - 2), [&](std::size_t jj) { apply(x, q, static_cast<int>(jj) + 1); },
                 opts.threads);
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) {
            const std::size_t k = idx(i, j);
            r[k] = rhs[k] - q[k];
            z[k] = r[k] / (2.0 * inv_h2 + beta[k]);
            p[k] = z[k];
        }
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        return reduce_rows(
            n, [&](int j) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += a[idx(i, j)] * b[idx(i, j)];
                return s;
            },
            opts.threads);
    };
    const double bnorm = std::sqrt(dot(rhs, rhs));
    double rz = dot(r, z);
    double rel = std::sqrt(dot(r, r)) / bnorm;
    f.residual_history.push_back(rel);
    const int max_it = opts.max_iterations > 0 ? opts.max_iterations : 20 * n;
    int it = 0;
    while (rel > opts.tol) {
        if (it >= max_it) {
            std::ostringstream msg;
            msg << "solve: PCG stopped after " << it << " iterations at relative residual " << rel
                << " (tol " << opts.tol << ")";
            throw NonConvergenceError(msg.str(), rel, f.residual_history);
        }
        parallel_for(static_cast<std::size_t>(n - 2),
                     [&](std::size_t jj) { apply(p, q, static_cast<int>(jj) + 1); }, opts.threads);
        const double alpha = rz / dot(p, q);
        parallel_for(static_cast<std::size_t>(n - 2), [&](std::size_t jj) {
            const int j = static_cast<int>(jj) + 1;
            for (int i = 1; i < n - 1; ++i) {
                const std::size_t k = idx(i, j);
                x[k] += alpha * p[k];
                r[k] -= alpha * q[k];
                z[k] = r[k] / (2.0 * inv_h2 + beta[k]);
            }
        }, opts.threads);
        const double rz_new = dot(r, z);
        const double beta_cg = rz_new / rz;
        rz = rz_new;
        parallel_for(static_cast<std::size_t>(n - 2), [&](std::size_t jj) {
            const int j = static_cast<int>(jj) + 1;
            for (int i = 1; i < n - 1; ++i) {
                const std::size_t k = idx(i, j);
                p[k] = z[k] + beta_cg * p[k];
            }
        }, opts.threads);
        rel = std::sqrt(dot(r, r)) / bnorm;
        f.residual_history.push_back(rel);
        ++it;
    }
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) f.values[idx(i, j)] = x[idx(i, j)];
    f.iterations = it;
    f.residual = rel;

    // Discrete maximum principle: the solution stays inside the range of 1/beta.
    const auto [bmin, bmax] = std::minmax_element(beta.begin(), beta.end());
    double lo = 1.0 / *bmax;
    double hi = 1.0 / *bmin;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (i == 0 || j == 0 || i == n - 1 || j == n - 1) {
                lo = std::min(lo, f.values[idx(i, j)]);
                hi = std::max(hi, f.values[idx(i, j)]);
            }
    for (double v : f.values)
        if (v < lo - 1e-8 || v > hi + 1e-8) {
            std::ostringstream msg;
            msg << "solve: value " << v << " outside the maximum-principle range [" << lo << ", " << hi << "]";
            throw NonConvergenceError(msg.str(), v, f.residual_history);
        }
    return f;
}

double u_origin(const Field& field)
{
    const int c = field.grid.centre();
    return field.at(c, c);
}

double symmetry_residual(const Field& field)
{
    const int n = field.grid.n;
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double u = field.at(i, j);
            worst = std::max(worst, std::abs(u - field.at(j, i)));
            worst = std::max(worst, std::abs(u - field.at(n - 1 - i, n - 1 - j)));
        }
    return worst;
}

AxisProfile axis_profile(const Field& field)
{
    const int n = field.grid.n;
    const int c = field.grid.centre();
    const double h = field.grid.h();
    AxisProfile prof;
    for (int j = c; j < n; ++j) {
        prof.y.push_back(field.grid.coord(j));
        prof.u.push_back(field.at(c, j));
        const double jump = (field.at(c + 1, j) - 2.0 * field.at(c, j) + field.at(c - 1, j)) / h;
        prof.jump.push_back(jump);
        if (j > c && j < n - 1) prof.max_abs_jump = std::max(prof.max_abs_jump, std::abs(jump));
    }
    return prof;
}

OriginConvergence origin_convergence(const Params& params, double half_width,
                                     const std::vector<int>& sizes, const SolveOptions& opts)
{
    if (sizes.size() < 2) throw PreconditionError("origin_convergence: need at least two grids");
    OriginConvergence oc;
    for (int n : sizes) {
        GridSpec g{half_width, n};
        const Field f = solve(params, g, opts);
        oc.n.push_back(n);
        oc.h.push_back(g.h());
        oc.u.push_back(u_origin(f));
    }
    const std::size_t m = oc.u.size();
    const double d_fine = oc.u[m - 1] - oc.u[m - 2];
    const double ratio = oc.h[m - 2] / oc.h[m - 1];
    double order = 1.0;
    if (m >= 3) {
        const double d_coarse = oc.u[m - 2] - oc.u[m - 3];
        const double q = d_coarse / d_fine;
        const double r2 = oc.h[m - 3] / oc.h[m - 2];
        if (d_fine != 0.0 && q > 1.0 && std::abs(r2 - ratio) < 1e-12 * ratio)
            order = std::log(q) / std::log(ratio);
        oc.observed_order = order;
    } else {
        oc.observed_order = 0.0;
    }
    oc.extrapolated = oc.u[m - 1] + d_fine / (std::pow(ratio, order) - 1.0);
    oc.error_estimate = std::abs(oc.extrapolated - oc.u[m - 1]);
    return oc;
}

} // namespace qocc::pde
