#pragma once

#include <optional>
#include <span>
#include <vector>

#include "satcm/geometry.hpp"
#include "satcm/interval_stabbing.hpp"
#include "satcm/rotation_bounds.hpp"
#include "satcm/saturation.hpp"

namespace satcm {

struct RotationConfig {
  double epsilon_r = 0.015;      // residual tolerance
  double gap = 1e-6;             // absolute certification gap
  double min_cube_width = 1e-3;  // rad; cubes below this are leaves
  long max_nodes = 2'000'000;    // iteration cap
  // Near-optimal candidates within this objective-value tolerance are also
  // reported (0 = exact ties only), refined only down to a coarser floor and
  // within a bounded sweep so downstream selection can arbitrate.
  double candidate_tolerance = 0.0;
  double candidate_resolution = 0.01;  // rad
  long candidate_sweep_nodes = 2000;
};

// One scored node of the search: a cube, its bounds, and the optimal theta
// regions of the exact center evaluation.
struct BnBNode {
  AxisCube cube;
  double upper = 0.0;
  double lower = 0.0;
  IntervalSet best_theta_regions;
  // Children inherit the parent's (sound) upper bound; the exact bound is
  // computed lazily when a node is popped, so abandoned nodes never pay.
  bool upper_exact = false;
};

struct RotationSolution {
  std::vector<AxisAngle> rotations;  // camera-to-world, ties included
  double value = 0.0;
  std::vector<std::vector<int>> inlier_sets;  // per rotation: assoc indices
  bool certified = false;
  double achieved_gap = 0.0;
  long nodes_explored = 0;
};

// Exact per-cube bounds of the saturated consensus objective, both computed
// by saturated interval stabbing over per-association theta intervals: the
// lower bound fixes the axis at the cube center, the upper bound relaxes the
// residual through the h1/h2 cube extremes.
std::pair<double, IntervalSet> rotation_lower_bound(
    const AxisCube& cube, std::span<const Association> associations,
    const WeightTable& weights, double epsilon_r);
double rotation_upper_bound(const AxisCube& cube,
                            std::span<const Association> associations,
                            const WeightTable& weights, double epsilon_r);

// Globally optimal saturated-consensus rotation search: best-first BnB over
// axis cubes with the amplitude handled exactly by interval stabbing. The
// default search region is the full axis sphere as two hemisphere cubes; a
// prior cube restricts the search as-is.
RotationSolution solve_rotation(std::span<const Association> associations,
                                const SaturationSpec& spec,
                                const RotationConfig& config,
                                std::optional<AxisCube> prior_cube = {});

// Weight table keyed by the associations' query indices (M_k = number of
// associations of query k). Indices must be dense in [0, K).
WeightTable make_weight_table(std::span<const Association> associations,
                              const SaturationSpec& spec);

}  // namespace satcm
