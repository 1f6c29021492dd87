#pragma once

#include <functional>
#include <vector>

namespace qocc::spectral {

struct Atom {
    double z = 0.0;  ///< location, >= 0
    double w = 0.0;  ///< signed weight
};

/// Local angular frequency of an integrand g(w) in its argument:
/// |d phase / dw| <= linear + sinh_rate * cosh(w). Used to size the quadrature
/// for basis measures; atoms ignore it.
struct Oscillation {
    double linear = 0.0;
    double sinh_rate = 0.0;
    bool any() const { return linear > 0.0 || sinh_rate > 0.0; }
};

/// z -> asinh(s sinh z). Composition multiplies s, the inverse is s -> 1/s.
double warp_map(double z, double s);
/// d/dz warp_map(z, s) = s cosh z / cosh(warp_map(z, s)).
double warp_derivative(double z, double s);

/// Signed measure on [0, inf), either a finite list of atoms or a combination
/// of odd-reflected Gaussian bumps
///
///     psi_k(z) = G_sigma(z - c_k) - G_sigma(z + c_k),   z >= 0,
///
/// which are nonnegative and have the closed-form sine transform
/// exp(-nu^2 sigma^2 / 2) sin(nu c_k). A basis measure may also carry a warp
/// s != 1, meaning it is the image of the bump combination under warp_map(., s).
class Measure {
public:
    enum class Kind { Atoms, Basis };

    Measure() = default;  ///< the zero measure (no atoms)

    static Measure from_atoms(std::vector<Atom> atoms, double support_bound = 10.0);
    static Measure from_basis(std::vector<double> centers, std::vector<double> coefficients,
                              double sigma, double support_bound = 10.0, double warp = 1.0);

    Kind kind() const noexcept { return kind_; }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const std::vector<double>& centers() const noexcept { return centers_; }
    const std::vector<double>& coefficients() const noexcept { return coefficients_; }
    double sigma() const noexcept { return sigma_; }
    double support_bound() const noexcept { return support_bound_; }
    double warp() const noexcept { return warp_; }
    bool is_zero() const;

    /// Sum |w_k| for atoms, sum |c_k| ||psi_k||_1 for bumps.
    double total_variation() const;

    /// int_0^inf sin(nu z) mu(dz).
    double sine_transform(double nu) const;

    /// int g(z) mu(dz). For bumps the quadrature resolves the oscillation
    /// described by `osc` and drops bumps whose contribution is below
    /// exp(-100) relative by the Gaussian's Fourier decay.
    double integrate(const std::function<double(double)>& g, const Oscillation& osc = {}) const;

    /// Image under warp_map(., s): atoms move exactly, bumps record the warp.
    Measure transported(double s) const;

    /// a * this + b * other. Both must be atoms, or bumps on the same centers,
    /// sigma and warp.
    Measure combined(double a, const Measure& other, double b) const;

private:
    Kind kind_ = Kind::Atoms;
    std::vector<Atom> atoms_;
    std::vector<double> centers_;
    std::vector<double> coefficients_;
    double sigma_ = 0.0;
    double support_bound_ = 10.0;
    double warp_ = 1.0;
};

/// Bump centers c_k = k (support_bound - 5 sigma) / n, k = 1..n. The grid for
/// n is a subset of the grid for 2n, so fits over doubling sizes are nested.
std::vector<double> bump_centers(int n, double support_bound, double sigma);

} // namespace qocc::spectral
