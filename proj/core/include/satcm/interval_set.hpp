#pragma once

#include <vector>

namespace satcm {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
  double mid() const { return 0.5 * (lo + hi); }
};

// Sorted union of disjoint closed intervals on a 1-D domain.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> intervals);

  static IntervalSet single(double lo, double hi);

  void add(double lo, double hi);  // invalidates sortedness until normalize()
  void normalize();                // sort and merge touching intervals

  bool empty() const { return intervals_.empty(); }
  std::size_t size() const { return intervals_.size(); }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }
  const std::vector<Interval>& intervals() const { return intervals_; }

  bool contains(double x) const;
  double total_length() const;

  auto begin() const { return intervals_.begin(); }
  auto end() const { return intervals_.end(); }

 private:
  std::vector<Interval> intervals_;
};

enum class MergeMode { set_union, set_intersection };

IntervalSet merge_interval_sets(const IntervalSet& a, const IntervalSet& b,
                                MergeMode mode);

}  // namespace satcm
