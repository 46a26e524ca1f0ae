#include "satcm/interval_stabbing.hpp"

#include <algorithm>
#include <cstdint>

namespace satcm {

namespace {

struct Event {
  double x;
  int sample;
  std::uint8_t is_right;  // lefts sort before rights at equal x
};

struct Plateau {
  double lo, hi;
  double value;
};

}  // namespace

StabResult sat_stab(std::span<const TaggedInterval> intervals,
                    const WeightTable& weights, double tie_tol) {
  StabResult result;
  result.counts_at_optimum.assign(weights.sample_count(), 0);
  if (intervals.empty()) {
    return result;
  }

  std::vector<Event> events;
  events.reserve(2 * intervals.size());
  for (const TaggedInterval& iv : intervals) {
    events.push_back({iv.lo, iv.sample, 0});
    events.push_back({iv.hi, iv.sample, 1});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.is_right != b.is_right) return a.is_right < b.is_right;
    return a.sample < b.sample;
  });

  // Sweep, recording the value plateau that starts at every left endpoint.
  std::vector<int> counts(weights.sample_count(), 0);
  std::vector<Plateau> plateaus;
  plateaus.reserve(intervals.size());
  double value = 0.0;
  double best = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (!e.is_right) {
      counts[e.sample] += 1;
      value += weights.weight(e.sample, counts[e.sample]);
      const double next_x = i + 1 < events.size() ? events[i + 1].x : e.x;
      plateaus.push_back({e.x, next_x, value});
      best = std::max(best, value);
    } else {
      value -= weights.weight(e.sample, counts[e.sample]);
      counts[e.sample] -= 1;
    }
  }

  result.value = best;
  for (const Plateau& p : plateaus) {
    if (p.value >= best - tie_tol) {
      result.optimal_regions.add(p.lo, p.hi);
    }
  }
  result.optimal_regions.normalize();

  if (!result.optimal_regions.empty()) {
    const double theta = result.optimal_regions[0].mid();
    for (const TaggedInterval& iv : intervals) {
      if (iv.lo <= theta && theta <= iv.hi) {
        result.counts_at_optimum[iv.sample] += 1;
      }
    }
  }
  return result;
}

}  // namespace satcm
