#pragma once

#include <span>
#include <string>
#include <vector>

namespace satcm {

enum class SaturationKind { identity, truncated, likelihood };

SaturationKind saturation_kind_from_string(const std::string& name);
std::string to_string(SaturationKind kind);

// Weighting scheme for consensus scores. `identity` reproduces plain
// consensus counting; `truncated` counts settled samples; `likelihood` assigns
// the diminishing log-ratio weights with scaling constant
// C = upper_bound / epsilon * q / (1 - q).
struct SaturationSpec {
  SaturationKind kind = SaturationKind::likelihood;
  double q = 0.9;            // prior probability, likelihood kind only
  double epsilon = 0.015;    // residual tolerance
  double upper_bound = 1.0;  // residual upper bound (1 for rotation)
};

double scaling_constant(const SaturationSpec& spec);

// w_k(n), the weight of the n-th inlier of a sample with m_k candidates.
// Requires 1 <= n <= m_k.
double weight(const SaturationSpec& spec, int m_k, int n);

// sigma_k(n) = sum of the first n weights. Requires 0 <= n <= m_k.
double sigma(const SaturationSpec& spec, int m_k, int n);

// Per-sample prefix sums of w_k, memoized per distinct association count so
// the stabbing sweep costs O(1) per event.
class WeightTable {
 public:
  WeightTable() = default;
  WeightTable(const SaturationSpec& spec, std::span<const int> m_per_sample);

  double weight(int sample, int n) const;  // w_k(n)
  double sigma(int sample, int n) const;   // sigma_k(n)
  int association_count(int sample) const { return m_per_sample_[sample]; }
  int sample_count() const { return static_cast<int>(m_per_sample_.size()); }

 private:
  std::vector<int> m_per_sample_;
  std::vector<const double*> prefix_;        // sample -> prefix-sum array
  std::vector<std::vector<double>> tables_;  // one per distinct m_k
};

}  // namespace satcm
