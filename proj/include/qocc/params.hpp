#pragma once

#include <string>
#include <string_view>

namespace qocc {

/// Killing rates: beta1 = alpha + lambda on the first and third quadrants,
/// beta2 = alpha on the second and fourth.
struct Params {
    double alpha = 1.0;
    double lambda = 0.0;

    Params() = default;
    /// Throws DomainError unless alpha > 0 and lambda >= 0 (both finite).
    Params(double alpha, double lambda);

    double beta1() const noexcept { return alpha + lambda; }
    double beta2() const noexcept { return alpha; }
};

/// Region whose occupation time is measured.
enum class Region {
    Opposite,        ///< x y > 0 (first and third quadrants)
    HalfPlane,       ///< x > 0
    SingleQuadrant,  ///< x > 0 and y > 0
};

inline constexpr Region kAllRegions[] = {Region::Opposite, Region::HalfPlane,
                                         Region::SingleQuadrant};

/// CLI spelling: "opposite", "half-plane", "single-quadrant".
std::string_view region_name(Region region);
/// Inverse of region_name; throws PreconditionError for anything else.
Region parse_region(std::string_view name);

inline bool in_region(Region region, double x, double y)
{
    switch (region) {
    case Region::Opposite: return x * y > 0.0;
    case Region::HalfPlane: return x > 0.0;
    case Region::SingleQuadrant: return x > 0.0 && y > 0.0;
    }
    return false;
}

} // namespace qocc
