#pragma once

#include <cstddef>
#include <cstdint>

#include "qualest/moments.hpp"

namespace qualest {

/// Summary statistics a synthesized population must reproduce.
struct MomentTargets {
  std::size_t N = 0;
  double P = 0.0;
  double Xbar = 0.0;
  double Cx = 0.0;
  double rho = 0.0;
};

/// Builds a population with round(N P) attribute holders whose x values hit
/// Xbar and Cx (affine rescale) and rho (closed-form solve for the gap
/// between the two group means relative to the within-group spread).
/// Within-group deviations are seeded uniform draws. All x are positive.
[[nodiscard]] Population synthesize(const MomentTargets& targets, std::uint64_t seed);

}  // namespace qualest
