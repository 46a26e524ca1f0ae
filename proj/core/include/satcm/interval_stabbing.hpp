#pragma once

#include <span>
#include <vector>

#include "satcm/interval_set.hpp"
#include "satcm/saturation.hpp"

namespace satcm {

// Closed interval on the stabbing parameter, tagged with the sample it
// belongs to. Multiple intervals per sample are allowed, but intervals of the
// same association must be disjoint.
struct TaggedInterval {
  double lo = 0.0;
  double hi = 0.0;
  int sample = 0;
};

struct StabResult {
  double value = 0.0;
  IntervalSet optimal_regions;
  std::vector<int> counts_at_optimum;  // N_k at the first optimal region
};

// Exact 1-D saturated consensus: maximizes
//   sum_k sigma_k(#{intervals of sample k containing theta})
// by a left-to-right sweep over sorted endpoints, left endpoints first at
// equal coordinates (closed-interval semantics). O(M log M) time, O(M) space.
// Plateaus within `tie_tol` of the maximum are merged into optimal_regions.
StabResult sat_stab(std::span<const TaggedInterval> intervals,
                    const WeightTable& weights, double tie_tol = 1e-12);

}  // namespace satcm
