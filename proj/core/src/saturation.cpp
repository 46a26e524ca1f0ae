#include "satcm/saturation.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace satcm {

SaturationKind saturation_kind_from_string(const std::string& name) {
  if (name == "identity") return SaturationKind::identity;
  if (name == "truncated") return SaturationKind::truncated;
  if (name == "likelihood") return SaturationKind::likelihood;
  throw std::invalid_argument("unknown saturation kind: " + name);
}

std::string to_string(SaturationKind kind) {
  switch (kind) {
    case SaturationKind::identity: return "identity";
    case SaturationKind::truncated: return "truncated";
    case SaturationKind::likelihood: return "likelihood";
  }
  return "?";
}

double scaling_constant(const SaturationSpec& spec) {
  if (spec.kind != SaturationKind::likelihood) {
    throw std::invalid_argument(
        "scaling_constant: only defined for the likelihood kind");
  }
  return spec.upper_bound / spec.epsilon * spec.q / (1.0 - spec.q);
}

double weight(const SaturationSpec& spec, int m_k, int n) {
  if (n < 1 || n > m_k) {
    throw std::out_of_range("weight: n outside [1, m_k]");
  }
  switch (spec.kind) {
    case SaturationKind::identity:
      return 1.0;
    case SaturationKind::truncated:
      return n == 1 ? 1.0 : 0.0;
    case SaturationKind::likelihood: {
      const double c = scaling_constant(spec);
      return std::log((m_k + n * c) / (m_k + (n - 1) * c));
    }
  }
  return 0.0;
}

double sigma(const SaturationSpec& spec, int m_k, int n) {
  if (n < 0 || n > m_k) {
    throw std::out_of_range("sigma: n outside [0, m_k]");
  }
  if (n == 0) return 0.0;
  switch (spec.kind) {
    case SaturationKind::identity:
      return static_cast<double>(n);
    case SaturationKind::truncated:
      return n >= 1 ? 1.0 : 0.0;
    case SaturationKind::likelihood: {
      const double c = scaling_constant(spec);
      return std::log1p(c * n / m_k);
    }
  }
  return 0.0;
}

WeightTable::WeightTable(const SaturationSpec& spec,
                         std::span<const int> m_per_sample)
    : m_per_sample_(m_per_sample.begin(), m_per_sample.end()) {
  std::map<int, std::size_t> index_of_m;
  prefix_.reserve(m_per_sample_.size());
  // Two passes: build one prefix table per distinct m_k, then resolve sample
  // pointers (tables_ never reallocates afterwards).
  for (int m : m_per_sample_) {
    if (m < 0) throw std::invalid_argument("WeightTable: negative m_k");
    if (index_of_m.emplace(m, tables_.size()).second) {
      std::vector<double> table(static_cast<std::size_t>(m) + 1, 0.0);
      for (int n = 1; n <= m; ++n) {
        table[n] = table[n - 1] + satcm::weight(spec, m, n);
      }
      tables_.push_back(std::move(table));
    }
  }
  for (int m : m_per_sample_) {
    prefix_.push_back(tables_[index_of_m.at(m)].data());
  }
}

double WeightTable::weight(int sample, int n) const {
  return prefix_[sample][n] - prefix_[sample][n - 1];
}

double WeightTable::sigma(int sample, int n) const {
  return prefix_[sample][n];
}

}  // namespace satcm
