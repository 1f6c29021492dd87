#include "qocc/params.hpp"

#include <cmath>

#include "qocc/errors.hpp"

namespace qocc {

Params::Params(double alpha_, double lambda_) : alpha(alpha_), lambda(lambda_)
{
    if (!std::isfinite(alpha) || !(alpha > 0.0))
        throw DomainError("Params: alpha must be positive (beta2 = alpha)");
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw DomainError("Params: lambda must be nonnegative");
}

std::string_view region_name(Region region)
{
    switch (region) {
    case Region::Opposite: return "opposite";
    case Region::HalfPlane: return "half-plane";
    case Region::SingleQuadrant: return "single-quadrant";
    }
    return "unknown";
}

Region parse_region(std::string_view name)
{
    for (Region r : kAllRegions)
        if (region_name(r) == name) return r;
    throw PreconditionError("unknown region '" + std::string(name) +
                            "' (expected opposite, half-plane or single-quadrant)");
}

} // namespace qocc
