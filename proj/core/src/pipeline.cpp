#include "satcm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

namespace satcm {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

AxisAngle antipode(const AxisAngle& a) {
  return AxisAngle{M_PI - a.alpha, wrap_2pi(a.phi + M_PI), a.theta};
}

}  // namespace

int remap_label(const LabelRemap& remap, int label) {
  const auto it = remap.find(label);
  return it == remap.end() ? label : it->second;
}

AssociationSet associate(std::span<const Line2D> query,
                         std::span<const Line3D> map_lines,
                         const LabelRemap& remap) {
  std::unordered_map<int, std::vector<int>> by_label;
  for (std::size_t m = 0; m < map_lines.size(); ++m) {
    by_label[remap_label(remap, map_lines[m].label)].push_back(
        static_cast<int>(m));
  }
  AssociationSet out;
  for (std::size_t k = 0; k < query.size(); ++k) {
    const auto it = by_label.find(remap_label(remap, query[k].label));
    if (it == by_label.end() || it->second.empty()) {
      out.dropped += 1;
      continue;
    }
    out.query_indices.push_back(static_cast<int>(k));
    out.candidates.push_back(it->second);
    out.m_k.push_back(static_cast<int>(it->second.size()));
    out.total += static_cast<long>(it->second.size());
  }
  return out;
}

AxisCube prior_cube_from_retrieval(const AxisAngle& prior_axis,
                                   double side_length) {
  const double alpha = std::clamp(prior_axis.alpha, 0.0, M_PI);
  const double phi = std::clamp(prior_axis.phi, 0.0, 2.0 * M_PI);
  if (std::abs(side_length - M_PI) < 1e-12) {
    // Binary division: alpha spans the full range, phi splits in two.
    // ceil puts exact grid-line hits in the lower cell.
    const int cell = std::max(1, static_cast<int>(std::ceil(phi / M_PI)));
    const int j = std::min(cell, 2) - 1;
    return AxisCube{0.0, M_PI, j * M_PI, (j + 1) * M_PI};
  }
  if (std::abs(side_length - M_PI / 2.0) < 1e-12) {
    const double side = M_PI / 2.0;
    const int i =
        std::min(std::max(1, static_cast<int>(std::ceil(alpha / side))), 2) - 1;
    const int j =
        std::min(std::max(1, static_cast<int>(std::ceil(phi / side))), 4) - 1;
    return AxisCube{i * side, (i + 1) * side, j * side, (j + 1) * side};
  }
  throw std::invalid_argument(
      "prior_cube_from_retrieval: side length must be pi or pi/2");
}

Eigen::AlignedBox3d scene_bounds(std::span<const Line3D> map_lines) {
  Eigen::AlignedBox3d box;
  for (const Line3D& line : map_lines) {
    box.extend(line.endpoints[0]);
    box.extend(line.endpoints[1]);
  }
  if (box.isEmpty()) return box;
  const Eigen::Vector3d pad =
      0.05 * box.sizes() + Eigen::Vector3d::Constant(1e-3);
  box.min() -= pad;
  box.max() += pad;
  return box;
}

RelocResult relocalize(const QueryInput& query,
                       std::span<const Line3D> map_lines,
                       const PipelineConfig& config, const LabelRemap& remap) {
  const auto t_start = Clock::now();
  RelocResult result;

  // Optional retrieval sub-map restriction.
  std::vector<Line3D> submap_storage;
  std::span<const Line3D> active_map = map_lines;
  if (!query.submap.empty()) {
    for (int idx : query.submap) {
      if (idx >= 0 && idx < static_cast<int>(map_lines.size())) {
        submap_storage.push_back(map_lines[idx]);
      }
    }
    active_map = submap_storage;
  }

  std::vector<Line2D> usable;
  for (const Line2D& l : query.lines) {
    const double len = (l.endpoints_px[0] - l.endpoints_px[1]).norm();
    if (len >= config.min_segment_length_px) usable.push_back(l);
  }

  const AssociationSet assoc = associate(usable, active_map, remap);
  result.queries_used = static_cast<int>(assoc.query_indices.size());
  result.queries_dropped = assoc.dropped +
                           static_cast<int>(query.lines.size() - usable.size());
  result.association_count = assoc.total;
  if (assoc.total == 0) {
    result.failure_reason = "no associations";
    result.ms_total = ms_since(t_start);
    return result;
  }

  std::vector<Association> associations;
  associations.reserve(assoc.total);
  for (std::size_t k = 0; k < assoc.query_indices.size(); ++k) {
    const Line2D& line = usable[assoc.query_indices[k]];
    for (int m : assoc.candidates[k]) {
      associations.emplace_back(static_cast<int>(k), m, line.normal,
                                active_map[m].direction);
    }
  }

  std::optional<AxisCube> prior_cube;
  const std::optional<double> side =
      config.prior_side_length.has_value() ? config.prior_side_length
                                           : query.prior_side_length;
  if (query.prior.has_value() && side.has_value()) {
    // The retrieval prior is a pose-rotation axis; the search axis of a pose
    // rotation is its antipode.
    prior_cube = prior_cube_from_retrieval(antipode(*query.prior), *side);
  }

  const auto t_rot = Clock::now();
  RotationConfig rot_config = config.rotation;
  const SaturationSpec rot_spec = config.rotation_saturation();
  if (rot_config.candidate_tolerance < 0.0) {
    // Auto: cover optima displaced by a couple of chance extra inliers, while
    // keeping decisively better consensus out of reach.
    std::vector<double> second_weights;
    for (int m : assoc.m_k) {
      if (m >= 2) {
        second_weights.push_back(sigma(rot_spec, m, 2) - sigma(rot_spec, m, 1));
      }
    }
    if (second_weights.empty()) {
      rot_config.candidate_tolerance = 0.0;
    } else {
      std::nth_element(second_weights.begin(),
                       second_weights.begin() + second_weights.size() / 2,
                       second_weights.end());
      rot_config.candidate_tolerance =
          2.2 * second_weights[second_weights.size() / 2];
    }
  }
  RotationSolution rotation;
  try {
    rotation = solve_rotation(associations, rot_spec, rot_config, prior_cube);
  } catch (const std::exception& e) {
    result.failure_reason = e.what();
    result.ms_total = ms_since(t_start);
    return result;
  }
  result.ms_rotation = ms_since(t_rot);
  result.value_r = rotation.value;
  result.certified_rotation = rotation.certified;
  result.rotation_candidates = static_cast<int>(rotation.rotations.size());

  const Eigen::AlignedBox3d box = scene_bounds(active_map);
  const SaturationSpec trans_spec = config.translation_saturation();

  struct Scored {
    Pose pose;
    double value_t = 0.0;
    int surviving = 0;
    double rss = 0.0;
    bool certified = false;
    int rot_inliers = 0;
  };
  std::optional<Scored> best;

  const auto t_trans = Clock::now();
  const int n_candidates =
      std::min<int>(config.max_rotation_candidates,
                    static_cast<int>(rotation.rotations.size()));
  for (int c = 0; c < n_candidates; ++c) {
    const Eigen::Matrix3d r = rotation_matrix(rotation.rotations[c]);
    std::vector<TransAssociation> trans;
    trans.reserve(rotation.inlier_sets[c].size());
    for (int idx : rotation.inlier_sets[c]) {
      const Association& a = associations[idx];
      const auto n_star = project_normal(r * a.n_c, a.v);
      if (!n_star.has_value()) continue;  // degenerate, dropped
      const Line3D& line = active_map[a.map_index];
      trans.emplace_back(a.query_index, *n_star, line.point, line.endpoints);
    }
    if (trans.empty()) continue;
    TranslationSolution ts;
    try {
      ts = solve_translation(trans, trans_spec, config.translation, box);
    } catch (const std::exception&) {
      continue;
    }
    for (const TranslationCandidate& cand : ts.candidates) {
      const std::vector<int> pruned =
          prune_inliers(cand.t, r, trans, cand.inliers, query.intrinsics);
      const RefineResult refined = refine_translation(trans, pruned, cand.t);
      Scored s;
      s.pose = {r, refined.t};
      s.value_t = cand.value;
      s.surviving = static_cast<int>(pruned.size());
      s.rss = refined.squared_residual;
      s.certified = ts.certified;
      s.rot_inliers = static_cast<int>(rotation.inlier_sets[c].size());
      const bool better =
          !best.has_value() || s.surviving > best->surviving ||
          (s.surviving == best->surviving && s.rss < best->rss - 1e-15);
      if (better) best = s;
    }
  }
  result.ms_translation = ms_since(t_trans);

  if (!best.has_value()) {
    result.failure_reason = "no surviving translation candidate";
    result.ms_total = ms_since(t_start);
    return result;
  }
  result.success = true;
  result.pose = best->pose;
  result.value_t = best->value_t;
  result.inliers_rotation = best->rot_inliers;
  result.inliers_translation = best->surviving;
  result.certified_translation = best->certified;
  result.ms_total = ms_since(t_start);
  return result;
}

}  // namespace satcm
