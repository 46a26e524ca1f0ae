#pragma once

#include <cstdint>
#include <vector>

#include "satcm/geometry.hpp"
#include "satcm/pipeline.hpp"

namespace satcm {

// Synthetic scene recipe. All randomness flows from `seed`.
struct SceneSpec {
  std::uint64_t seed = 0;
  int n_map_lines = 200;  // distractors + planted matches
  int dictionary_size = 8;
  std::vector<double> label_probs;  // empty = uniform over the dictionary
  int n_query = 15;                 // K
  double noise_angle = 0.0;         // rad, applied to query normals
  double match_fraction = 1.0;      // fraction of query lines with a match
  Eigen::AlignedBox3d box{Eigen::Vector3d(-4, -4, -4),
                          Eigen::Vector3d(4, 4, 4)};
  // Planted one-to-many traps: clusters of same-label map lines that are all
  // consistent with one wrong rotation (added on top of n_map_lines).
  int ambiguous_clusters = 0;
  int ambiguous_cluster_size = 25;
};

struct SyntheticScene {
  std::vector<Line3D> map_lines;
  Intrinsics intrinsics;
  Pose gt_pose;
  std::vector<Line2D> query;
  std::vector<int> true_match;  // per query line: map index or -1
  double outlier_ratio = 0.0;   // (M - #true) / M under label association
};

SyntheticScene synth_scene(const SceneSpec& spec);

}  // namespace satcm
