#include "qocc/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qocc/errors.hpp"
#include "qocc/quadrature.hpp"

namespace qocc::spectral {

namespace {

constexpr int kOrder = 20;
constexpr double kGaussReach = 8.0;   // bump truncated at c +- 8 sigma
constexpr double kFourierSkip = 14.0; // sigma * omega beyond this: e^{-98}

double gauss(double u, double sigma)
{
    const double t = u / sigma;
    return std::exp(-0.5 * t * t) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

void check_support(double z, double bound, const char* what)
{
    if (!std::isfinite(z) || z < 0.0 || z > bound)
        throw PreconditionError(std::string("Measure: ") + what + " outside [0, support_bound]");
}

} // namespace

double warp_map(double z, double s)
{
    if (s == 1.0) return z;
    // asinh(w) = log(2w) + O(w^-2) and 2 s sinh z = s e^z (1 - e^{-2z});
    // beyond e^40 both corrections are below rounding, and sinh would overflow.
    if (z > 40.0 && z + std::log(s) > 40.0) return z + std::log(s);
    return std::asinh(s * std::sinh(z));
}

double warp_derivative(double z, double s)
{
    if (s == 1.0) return 1.0;
    if (z > 40.0) {
        const double inv = 1.0 / (s * std::sinh(z));  // 0 once sinh overflows
        return 1.0 / (std::tanh(z) * std::sqrt(1.0 + inv * inv));
    }
    return s * std::cosh(z) / std::hypot(1.0, s * std::sinh(z));
}

Measure Measure::from_atoms(std::vector<Atom> atoms, double support_bound)
{
    if (!(support_bound > 0.0)) throw PreconditionError("Measure: support_bound must be positive");
    for (const Atom& a : atoms) {
        check_support(a.z, support_bound, "atom location");
        if (!std::isfinite(a.w)) throw PreconditionError("Measure: atom weight must be finite");
    }
    Measure m;
    m.kind_ = Kind::Atoms;
    m.atoms_ = std::move(atoms);
    m.support_bound_ = support_bound;
    return m;
}

Measure Measure::from_basis(std::vector<double> centers, std::vector<double> coefficients,
                            double sigma, double support_bound, double warp)
{
    if (centers.size() != coefficients.size())
        throw PreconditionError("Measure: one coefficient per bump center required");
    if (!(sigma > 0.0)) throw PreconditionError("Measure: bump width must be positive");
    if (!(support_bound > 0.0)) throw PreconditionError("Measure: support_bound must be positive");
    if (!(warp > 0.0)) throw PreconditionError("Measure: warp factor must be positive");
    for (double c : centers) check_support(warp_map(c, warp), warp_map(support_bound, warp), "bump center");
    for (double c : coefficients)
        if (!std::isfinite(c)) throw PreconditionError("Measure: coefficient must be finite");
    Measure m;
    m.kind_ = Kind::Basis;
    m.centers_ = std::move(centers);
    m.coefficients_ = std::move(coefficients);
    m.sigma_ = sigma;
    m.support_bound_ = support_bound;
    m.warp_ = warp;
    return m;
}

bool Measure::is_zero() const
{
    if (kind_ == Kind::Atoms)
        return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.w == 0.0; });
    return std::all_of(coefficients_.begin(), coefficients_.end(), [](double c) { return c == 0.0; });
}

double Measure::total_variation() const
{
    double tv = 0.0;
    if (kind_ == Kind::Atoms) {
        for (const Atom& a : atoms_) tv += std::abs(a.w);
        return tv;
    }
    for (std::size_t k = 0; k < centers_.size(); ++k)
        tv += std::abs(coefficients_[k]) * std::erf(centers_[k] / (sigma_ * std::numbers::sqrt2));
    return tv;
}

double Measure::sine_transform(double nu) const
{
    if (kind_ == Kind::Atoms) {
        double s = 0.0;
        for (const Atom& a : atoms_) s += a.w * std::sin(nu * a.z);
        return s;
    }
    if (warp_ != 1.0)
        return integrate([nu](double z) { return std::sin(nu * z); }, Oscillation{nu, 0.0});
    const double damp = std::exp(-0.5 * nu * nu * sigma_ * sigma_);
    if (damp == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < centers_.size(); ++k) s += coefficients_[k] * std::sin(nu * centers_[k]);
    return damp * s;
}

double Measure::integrate(const std::function<double(double)>& g, const Oscillation& osc) const
{
    if (kind_ == Kind::Atoms) {
        double s = 0.0;
        for (const Atom& a : atoms_) s += a.w * g(a.z);
        return s;
    }
    const quad::GaussRule& rule = quad::gauss_legendre(kOrder);
    // Frequency of g(warp(z)) in the bump variable z.
    auto omega = [&](double z) {
        const double w = warp_map(z, warp_);
        return (osc.linear + osc.sinh_rate * std::cosh(w)) * warp_derivative(z, warp_);
    };
    double total = 0.0;
    for (std::size_t k = 0; k < centers_.size(); ++k) {
        if (coefficients_[k] == 0.0) continue;
        const double c = centers_[k];
        const double lo = std::max(0.0, c - kGaussReach * sigma_);
        const double hi = c + kGaussReach * sigma_;
        // The smooth bump against a phase whose rate exceeds 1/sigma by a wide
        // margin integrates to exp(-(sigma omega)^2 / 2) of its mass.
        if (osc.any() && lo > 0.0 && sigma_ * omega(std::max(lo, c - 5.0 * sigma_)) > kFourierSkip)
            continue;
        double sum = 0.0;
        double a = lo;
        while (a < hi) {
            double width = 0.5 * sigma_;
            if (osc.any()) {
                const double w_end = std::min(hi, a + width);
                width = std::min(width, 4.0 * std::numbers::pi / omega(w_end));
            }
            const double b = std::min(hi, a + width);
            const double mid = 0.5 * (a + b);
            const double half = 0.5 * (b - a);
            double panel = 0.0;
            for (int i = 0; i < kOrder; ++i) {
                const double z = mid + half * rule.nodes[i];
                const double psi = gauss(z - c, sigma_) - gauss(z + c, sigma_);
                panel += rule.weights[i] * psi * g(warp_map(z, warp_));
            }
            sum += half * panel;
            a = b;
        }
        total += coefficients_[k] * sum;
    }
    return total;
}

Measure Measure::transported(double s) const
{
    if (!(s > 0.0)) throw PreconditionError("Measure: warp factor must be positive");
    if (kind_ == Kind::Atoms) {
        std::vector<Atom> moved = atoms_;
        for (Atom& a : moved) a.z = warp_map(a.z, s);
        return from_atoms(std::move(moved), warp_map(support_bound_, s));
    }
    Measure m = *this;
    m.warp_ = warp_ * s;
    // Composition that lands back on the identity should be the identity exactly.
    if (std::abs(m.warp_ - 1.0) < 4.0 * std::numeric_limits<double>::epsilon()) m.warp_ = 1.0;
    return m;
}

Measure Measure::combined(double a, const Measure& other, double b) const
{
    if (kind_ != other.kind_) throw PreconditionError("Measure: cannot combine atoms with bumps");
    if (kind_ == Kind::Atoms) {
        std::vector<Atom> out;
        out.reserve(atoms_.size() + other.atoms_.size());
        for (const Atom& x : atoms_) out.push_back({x.z, a * x.w});
        for (const Atom& x : other.atoms_) out.push_back({x.z, b * x.w});
        return from_atoms(std::move(out), std::max(support_bound_, other.support_bound_));
    }
    if (centers_ != other.centers_ || sigma_ != other.sigma_ || warp_ != other.warp_)
        throw PreconditionError("Measure: bump expansions on different bases");
    std::vector<double> coeff(coefficients_.size());
    for (std::size_t k = 0; k < coeff.size(); ++k)
        coeff[k] = a * coefficients_[k] + b * other.coefficients_[k];
    Measure m = *this;
    m.coefficients_ = std::move(coeff);
    return m;
}

std::vector<double> bump_centers(int n, double support_bound, double sigma)
{
    if (n < 1) throw PreconditionError("bump_centers: need at least one bump");
    const double span = support_bound - 5.0 * sigma;
    if (!(span > 0.0)) throw PreconditionError("bump_centers: sigma too wide for the support");
    std::vector<double> c(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) c[k - 1] = k * span / n;
    return c;
}

} // namespace qocc::spectral
