#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "satcm/eval.hpp"
#include "satcm/pipeline.hpp"

namespace satcm {

// Versioned JSON line-map format: endpoints plus integer label per line; the
// anchor point and direction are derived on load.
void write_map(const std::string& path, std::span<const Line3D> lines,
               const std::map<int, std::string>& dictionary = {});
std::vector<Line3D> read_map(const std::string& path,
                             std::map<int, std::string>* dictionary = nullptr);

// One query: intrinsics, pixel-space lines, optional retrieval prior and
// sub-map restriction; ground truth is carried when the scene is synthetic.
struct QueryRecord {
  QueryInput query;
  std::optional<Pose> gt_pose;
  std::optional<double> gt_outlier_ratio;
};

// A query file holds either a single query object or an array of them.
void write_queries(const std::string& path, std::span<const QueryRecord> queries);
std::vector<QueryRecord> read_queries(const std::string& path);

void write_results(const std::string& path, std::span<const RelocResult> results);
std::vector<RelocResult> read_results(const std::string& path);

// Label remap table: {"remap": [{"from": id, "to": id}, ...]}.
LabelRemap read_label_remap(const std::string& path);

void write_landscape_csv(const std::string& path, const LandscapeGrid& grid);

struct SweepPoint {
  double q = 0.0;
  double recall_rot_5deg = 0.0;
  std::array<double, 3> recall_trans_cm = {0, 0, 0};
  double median_rot_deg = 0.0;
  double median_trans_cm = 0.0;
};
void write_sweep_csv(const std::string& path, std::span<const SweepPoint> rows);

void write_report_csv(const std::string& path, const EvalReport& report);

}  // namespace satcm
