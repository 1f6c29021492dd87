#include "qocc/moment_oracle.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qocc/errors.hpp"
#include "qocc/quadrature.hpp"

namespace qocc::moments {

namespace {

constexpr double kPi = std::numbers::pi;

// Sum over sign patterns of the joint sign probabilities of one coordinate,
// assembled into P(region at every time) from the independence of X and Y.
double combine(Region region, const double* q, int patterns)
{
    switch (region) {
    case Region::Opposite: {
        double s = 0.0;
        for (int i = 0; i < patterns; ++i) s += q[i] * q[i];
        return s;
    }
    case Region::HalfPlane: return q[patterns - 1];
    case Region::SingleQuadrant: return q[patterns - 1] * q[patterns - 1];
    }
    return 0.0;
}

// P(region at t1 < t2) with sqrt(t1/t2) = sin(phi).
double joint2(Region region, double phi)
{
    const double r = phi / (2.0 * kPi);
    // patterns ordered so that the all-positive one is last
    const std::array<double, 4> q = {0.25 + r, 0.25 - r, 0.25 - r, 0.25 + r};
    return combine(region, q.data(), 4);
}

// P(region at t1 < t2 < t3) with sqrt(t1/t2) = sin(a), sqrt(t2/t3) = sin(b).
double joint3(Region region, double a, double b)
{
    const double r12 = std::sin(a);
    const double r23 = std::sin(b);
    const double r13 = r12 * r23;
    std::array<double, 8> q{};
    for (int mask = 0; mask < 8; ++mask) {
        const double s1 = (mask & 1) ? 1.0 : -1.0;
        const double s2 = (mask & 2) ? 1.0 : -1.0;
        const double s3 = (mask & 4) ? 1.0 : -1.0;
        q[mask] = 0.125 + (std::asin(s1 * s2 * r12) + std::asin(s1 * s3 * r13) +
                           std::asin(s2 * s3 * r23)) / (4.0 * kPi);
    }
    return combine(region, q.data(), 8);
}

} // namespace

double arcsine_cdf(double u)
{
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("arcsine_cdf: u must lie in [0, 1]");
    return 2.0 / kPi * std::asin(std::sqrt(u));
}

double sign_pair_prob(double s, double t)
{
    if (!(s > 0.0) || !(t > s)) throw DomainError("sign_pair_prob: need 0 < s < t");
    return 0.25 + std::asin(std::sqrt(s / t)) / (2.0 * kPi);
}

double orthant3(double rho12, double rho13, double rho23)
{
    for (double r : {rho12, rho13, rho23})
        if (!(r >= -1.0 && r <= 1.0)) throw DomainError("orthant3: correlations must lie in [-1, 1]");
    const double det = 1.0 - rho12 * rho12 - rho13 * rho13 - rho23 * rho23 + 2.0 * rho12 * rho13 * rho23;
    if (det < -1e-12) throw DomainError("orthant3: correlation matrix is not positive semidefinite");
    return 0.125 + (std::asin(rho12) + std::asin(rho13) + std::asin(rho23)) / (4.0 * kPi);
}

MomentResult moment(int order, Region region, double abs_tol)
{
    if (order < 1 || order > 3) throw PreconditionError("moment: order must be 1, 2 or 3");
    if (!(abs_tol > 0.0)) throw PreconditionError("moment: abs_tol must be positive");
    MomentResult out;
    out.order = order;
    out.region = region;
    const double half_pi = 0.5 * kPi;
    if (order == 1) {
        out.value = region == Region::SingleQuadrant ? 0.25 : 0.5;
        return out;
    }
    quad::Result res;
    if (order == 2) {
        // E[T^2] = int_0^1 P(u) du, u = sin^2(phi), du = sin(2 phi) dphi.
        auto f = [&](double phi) { return joint2(region, phi) * std::sin(2.0 * phi); };
        res = quad::integrate_adaptive(f, 0.0, half_pi, abs_tol * 1e-2, 0.0, 4000);
    } else {
        // E[T^3] = 2 int int P(u1, u2) u2 du1 du2.
        const double inner_tol = abs_tol * 1e-2;
        bool inner_ok = true;
        double inner_err = 0.0;
        auto outer = [&](double b) {
            const double u2 = std::sin(b) * std::sin(b);
            auto inner = [&](double a) { return joint3(region, a, b) * std::sin(2.0 * a); };
            const quad::Result r = quad::integrate_adaptive(inner, 0.0, half_pi, inner_tol, 0.0, 4000);
            inner_ok = inner_ok && r.converged;
            inner_err = std::max(inner_err, r.abs_error);
            return 2.0 * r.value * u2 * std::sin(2.0 * b);
        };
        res = quad::integrate_adaptive(outer, 0.0, half_pi, abs_tol * 1e-2, 0.0, 4000);
        res.converged = res.converged && inner_ok;
        // Every outer node carries at most inner_err; the outer weights integrate
        // 2 sin^2(b) sin(2b) over [0, pi/2] to 1.
        res.abs_error += inner_err;
    }
    out.value = res.value;
    out.quadrature_error = res.abs_error;
    if (!res.converged || !(res.abs_error <= abs_tol)) {
        std::ostringstream msg;
        msg << "moment: quadrature for order " << order << " reached error " << res.abs_error
            << " > " << abs_tol;
        throw NonConvergenceError(msg.str(), res.value, {res.abs_error});
    }
    return out;
}

double kolmogorov_quantile(double level)
{
    if (!(level > 0.0 && level < 1.0)) throw PreconditionError("kolmogorov_quantile: level must lie in (0, 1)");
    auto tail = [](double c) {
        double s = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double term = std::exp(-2.0 * k * k * c * c);
            s += (k % 2 ? 1.0 : -1.0) * term;
            if (term < 1e-18) break;
        }
        return 2.0 * s;
    };
    // tail is decreasing in c; bracket [0.2, 5] covers level in (1e-21, 0.9999).
    double lo = 0.2;
    double hi = 5.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) > level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double ks_threshold(long long n, double level)
{
    if (n < 30) throw PreconditionError("ks_threshold: asymptotic value needs n >= 30");
    return kolmogorov_quantile(level) / std::sqrt(static_cast<double>(n));
}

} // namespace qocc::moments
