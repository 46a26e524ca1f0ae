#include "satcm/interval_set.hpp"

#include <algorithm>

namespace satcm {

IntervalSet::IntervalSet(std::vector<Interval> intervals)
    : intervals_(std::move(intervals)) {
  normalize();
}

IntervalSet IntervalSet::single(double lo, double hi) {
  IntervalSet s;
  if (lo <= hi) s.intervals_.push_back({lo, hi});
  return s;
}

void IntervalSet::add(double lo, double hi) {
  if (lo <= hi) intervals_.push_back({lo, hi});
}

void IntervalSet::normalize() {
  std::sort(intervals_.begin(), intervals_.end(),
            [](const Interval& a, const Interval& b) {
              return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
            });
  std::vector<Interval> merged;
  for (const Interval& iv : intervals_) {
    if (!merged.empty() && iv.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  intervals_ = std::move(merged);
}

bool IntervalSet::contains(double x) const {
  auto it = std::upper_bound(
      intervals_.begin(), intervals_.end(), x,
      [](double v, const Interval& iv) { return v < iv.lo; });
  return it != intervals_.begin() && std::prev(it)->contains(x);
}

double IntervalSet::total_length() const {
  double len = 0.0;
  for (const Interval& iv : intervals_) len += iv.hi - iv.lo;
  return len;
}

IntervalSet merge_interval_sets(const IntervalSet& a, const IntervalSet& b,
                                MergeMode mode) {
  IntervalSet out;
  if (mode == MergeMode::set_union) {
    std::vector<Interval> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    out = IntervalSet(std::move(all));
    return out;
  }
  // Intersection: both inputs sorted and disjoint, two-pointer sweep.
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lo, b[j].lo);
    const double hi = std::min(a[i].hi, b[j].hi);
    if (lo <= hi) out.add(lo, hi);
    if (a[i].hi < b[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  out.normalize();
  return out;
}

}  // namespace satcm
