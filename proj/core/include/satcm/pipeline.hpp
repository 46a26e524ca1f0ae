#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "satcm/geometry.hpp"
#include "satcm/rotation_solver.hpp"
#include "satcm/translation_solver.hpp"

namespace satcm {

// Per query line: the map-line candidates sharing its (remapped) label.
struct AssociationSet {
  std::vector<int> query_indices;            // kept query lines (original ids)
  std::vector<std::vector<int>> candidates;  // per kept query: map indices
  std::vector<int> m_k;                      // candidate counts
  long total = 0;                            // M = sum m_k
  int dropped = 0;                           // zero-candidate query lines
};

using LabelRemap = std::map<int, int>;

AssociationSet associate(std::span<const Line2D> query,
                         std::span<const Line3D> map_lines,
                         const LabelRemap& remap = {});

int remap_label(const LabelRemap& remap, int label);

// Grid cube of the axis sphere containing `axis`: binary division for side
// pi, octal for side pi/2. Boundary axes go to the lower cell.
AxisCube prior_cube_from_retrieval(const AxisAngle& prior_axis,
                                   double side_length);

struct PipelineConfig {
  SaturationKind saturation_kind = SaturationKind::likelihood;
  double saturation_q = 0.9;
  // candidate_tolerance < 0 selects an automatic value (a small multiple of
  // the marginal second-inlier weight) so the translation stage can
  // arbitrate among near-optimal rotations.
  RotationConfig rotation{.candidate_tolerance = -1.0};
  SaturationKind translation_saturation_kind = SaturationKind::truncated;
  double translation_q = 0.9;
  TranslationConfig translation;
  double min_segment_length_px = 0.0;
  int max_rotation_candidates = 8;
  // nullopt: no prior is used even if the query carries one.
  std::optional<double> prior_side_length;

  SaturationSpec rotation_saturation() const {
    return {saturation_kind, saturation_q, rotation.epsilon_r, 1.0};
  }
  SaturationSpec translation_saturation() const {
    return {translation_saturation_kind, translation_q, translation.epsilon_t,
            1.0};
  }
};

struct RelocResult {
  bool success = false;
  std::string failure_reason;
  Pose pose;
  double value_r = 0.0;
  double value_t = 0.0;
  int rotation_candidates = 0;
  int inliers_rotation = 0;
  int inliers_translation = 0;  // surviving the physical pruning
  bool certified_rotation = false;
  bool certified_translation = false;
  double ms_rotation = 0.0;
  double ms_translation = 0.0;
  double ms_total = 0.0;
  int queries_used = 0;
  int queries_dropped = 0;
  long association_count = 0;
};

struct QueryInput {
  std::vector<Line2D> lines;
  Intrinsics intrinsics;
  std::optional<AxisAngle> prior;        // camera-to-world rotation axis
  std::optional<double> prior_side_length;
  std::vector<int> submap;               // optional map-line restriction
};

// End-to-end relocalization of one query against a line map.
RelocResult relocalize(const QueryInput& query,
                       std::span<const Line3D> map_lines,
                       const PipelineConfig& config,
                       const LabelRemap& remap = {});

// Scene bounding box from the map-line endpoints, inflated by 10%.
Eigen::AlignedBox3d scene_bounds(std::span<const Line3D> map_lines);

}  // namespace satcm
