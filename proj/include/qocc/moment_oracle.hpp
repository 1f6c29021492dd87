#pragma once

#include "qocc/params.hpp"

namespace qocc::moments {

/// (2/pi) asin(sqrt(u)), u in [0, 1].
double arcsine_cdf(double u);

/// P(W_s > 0, W_t > 0) = 1/4 + asin(sqrt(s/t)) / (2 pi), 0 < s < t.
double sign_pair_prob(double s, double t);

/// Orthant probability of a centred trivariate Gaussian with the given
/// correlations: 1/8 + (asin r12 + asin r13 + asin r23) / (4 pi). Throws
/// DomainError if the correlation matrix is not positive semidefinite.
double orthant3(double rho12, double rho13, double rho23);

struct MomentResult {
    int order = 0;
    Region region = Region::Opposite;
    double value = 0.0;
    double quadrature_error = 0.0;
};

/// E[T^k], k in {1, 2, 3}, T the occupation time of `region` on [0, 1] for a
/// planar Brownian motion started at the origin. k! times the integral over
/// the ordered simplex of P(region at every t_i), written in the ratios
/// u_i = t_i / t_{i+1} and the angles u = sin^2(phi) that make the integrand
/// smooth. Throws NonConvergenceError if the quadrature misses abs_tol.
MomentResult moment(int order, Region region, double abs_tol = 1e-7);

/// Asymptotic one-sample Kolmogorov-Smirnov critical value c(level) / sqrt(n),
/// with c the upper `level` quantile of the Kolmogorov distribution. n >= 30.
double ks_threshold(long long n, double level);

/// c(level) itself: the root of 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 c^2) = level.
double kolmogorov_quantile(double level);

} // namespace qocc::moments
