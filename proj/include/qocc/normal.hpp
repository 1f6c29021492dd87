#pragma once

namespace qocc::rng {

/// Standard normal quantile, Wichura's AS241 (PPND16), relative accuracy about
/// 1e-16 on (0, 1). Branch-only arithmetic, so results are identical on every
/// IEEE-754 platform with correctly rounded log and sqrt.
double normal_quantile(double p);

} // namespace qocc::rng
