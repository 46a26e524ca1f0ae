#pragma once

#include <array>
#include <span>
#include <vector>

#include "satcm/pipeline.hpp"
#include "satcm/rotation_bounds.hpp"

namespace satcm {

struct EvalReport {
  int count = 0;
  int failures = 0;
  // 25/50/75 quantiles, linear interpolation between order statistics.
  std::array<double, 3> rotation_quantiles_deg = {0, 0, 0};
  std::array<double, 3> translation_quantiles_cm = {0, 0, 0};
  double recall_rot_5deg = 0.0;
  std::array<double, 3> recall_trans_cm = {0, 0, 0};  // at 5/10/15 cm
  double median_outlier_ratio = 0.0;
  double median_ms = 0.0;
};

// Quantile with the linear-interpolation convention: position p*(n-1) between
// sorted order statistics. `values` is copied and sorted internally.
double quantile(std::vector<double> values, double p);

// Per-query errors against ground truth (failures score as infinite error).
// `outlier_ratios` is optional bookkeeping from the generator.
EvalReport evaluate(std::span<const RelocResult> results,
                    std::span<const Pose> ground_truth,
                    std::span<const double> outlier_ratios = {});

// Objective landscape over the axis sphere: for every cell center the exact
// per-axis optimum over theta via interval stabbing, normalized by the grid
// maximum.
struct LandscapeGrid {
  int n_alpha = 0;
  int n_phi = 0;
  double d_alpha = 0.0;
  double d_phi = 0.0;
  std::vector<double> values;  // row-major alpha x phi, in [0, 1]

  double at(int i, int j) const { return values[i * n_phi + j]; }
  std::pair<double, double> cell_center(int i, int j) const {
    return {(i + 0.5) * d_alpha, (j + 0.5) * d_phi};
  }
  std::pair<int, int> argmax() const;
};

LandscapeGrid landscape(std::span<const Association> associations,
                        const SaturationSpec& spec, double resolution_rad,
                        double epsilon_r);

}  // namespace satcm
