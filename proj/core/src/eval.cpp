#include "satcm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "satcm/interval_stabbing.hpp"
#include "satcm/rotation_solver.hpp"

namespace satcm {

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = p * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - lo;
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

EvalReport evaluate(std::span<const RelocResult> results,
                    std::span<const Pose> ground_truth,
                    std::span<const double> outlier_ratios) {
  if (results.size() != ground_truth.size()) {
    throw std::invalid_argument("evaluate: result/ground-truth length mismatch");
  }
  EvalReport report;
  report.count = static_cast<int>(results.size());

  std::vector<double> rot_err, trans_err, times;
  int hit_rot = 0;
  std::array<int, 3> hit_trans = {0, 0, 0};
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RelocResult& r = results[i];
    times.push_back(r.ms_total);
    if (!r.success) {
      report.failures += 1;
      rot_err.push_back(std::numeric_limits<double>::infinity());
      trans_err.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const double e_rot =
        rotation_error_deg(r.pose.rotation, ground_truth[i].rotation);
    const double e_trans =
        (r.pose.translation - ground_truth[i].translation).norm() * 100.0;
    rot_err.push_back(e_rot);
    trans_err.push_back(e_trans);
    if (e_rot <= 5.0) hit_rot += 1;
    const double thresholds[3] = {5.0, 10.0, 15.0};
    for (int t = 0; t < 3; ++t) {
      if (e_trans <= thresholds[t]) hit_trans[t] += 1;
    }
  }

  for (int qi = 0; qi < 3; ++qi) {
    const double p = 0.25 * (qi + 1);
    report.rotation_quantiles_deg[qi] = quantile(rot_err, p);
    report.translation_quantiles_cm[qi] = quantile(trans_err, p);
  }
  if (report.count > 0) {
    report.recall_rot_5deg = double(hit_rot) / report.count;
    for (int t = 0; t < 3; ++t) {
      report.recall_trans_cm[t] = double(hit_trans[t]) / report.count;
    }
    report.median_ms = quantile(times, 0.5);
  }
  if (!outlier_ratios.empty()) {
    report.median_outlier_ratio = quantile(
        std::vector<double>(outlier_ratios.begin(), outlier_ratios.end()), 0.5);
  }
  return report;
}

std::pair<int, int> LandscapeGrid::argmax() const {
  int best = 0;
  for (int i = 1; i < n_alpha * n_phi; ++i) {
    if (values[i] > values[best]) best = i;
  }
  return {best / n_phi, best % n_phi};
}

LandscapeGrid landscape(std::span<const Association> associations,
                        const SaturationSpec& spec, double resolution_rad,
                        double epsilon_r) {
  if (resolution_rad <= 0.0) {
    throw std::invalid_argument("landscape: resolution must be positive");
  }
  LandscapeGrid grid;
  grid.n_alpha = std::max(1, static_cast<int>(std::lround(M_PI / resolution_rad)));
  grid.n_phi =
      std::max(1, static_cast<int>(std::lround(2.0 * M_PI / resolution_rad)));
  grid.d_alpha = M_PI / grid.n_alpha;
  grid.d_phi = 2.0 * M_PI / grid.n_phi;
  grid.values.assign(static_cast<std::size_t>(grid.n_alpha) * grid.n_phi, 0.0);

  const WeightTable weights = make_weight_table(associations, spec);
  std::vector<TaggedInterval> intervals;
  double vmax = 0.0;
  for (int i = 0; i < grid.n_alpha; ++i) {
    for (int j = 0; j < grid.n_phi; ++j) {
      const auto [alpha, phi] = grid.cell_center(i, j);
      const Eigen::Vector3d u = polar_to_xyz(alpha, phi);
      intervals.clear();
      std::array<Interval, 4> buf;
      for (const Association& a : associations) {
        const int n = exact_theta_intervals(u, a, epsilon_r, buf);
        for (int i = 0; i < n; ++i) {
          intervals.push_back({buf[i].lo, buf[i].hi, a.query_index});
        }
      }
      const double v = sat_stab(intervals, weights).value;
      grid.values[i * grid.n_phi + j] = v;
      vmax = std::max(vmax, v);
    }
  }
  if (vmax > 0.0) {
    for (double& v : grid.values) v /= vmax;
  }
  return grid;
}

}  // namespace satcm
