#include "satcm/io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace satcm {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << "\n";
}

json vec3_to_json(const Eigen::Vector3d& v) { return json{v.x(), v.y(), v.z()}; }
Eigen::Vector3d vec3_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}
json vec2_to_json(const Eigen::Vector2d& v) { return json{v.x(), v.y()}; }
Eigen::Vector2d vec2_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json pose_to_json(const Pose& pose) {
  const Eigen::Quaterniond q(pose.rotation);
  return json{{"rotation", {q.w(), q.x(), q.y(), q.z()}},
              {"translation", vec3_to_json(pose.translation)}};
}

Pose pose_from_json(const json& j) {
  const auto& r = j.at("rotation");
  Eigen::Quaterniond q(r.at(0).get<double>(), r.at(1).get<double>(),
                       r.at(2).get<double>(), r.at(3).get<double>());
  q.normalize();
  return {q.toRotationMatrix(), vec3_from_json(j.at("translation"))};
}

json query_to_json(const QueryRecord& record) {
  const QueryInput& q = record.query;
  json lines = json::array();
  for (const Line2D& l : q.lines) {
    // Pixel coefficients reconstruct the normal on load: (A,B,C) = n K^-1.
    const Eigen::RowVector3d coeffs =
        l.normal.transpose() * q.intrinsics.k.inverse();
    lines.push_back(json{
        {"coeffs", {coeffs[0], coeffs[1], coeffs[2]}},
        {"endpoints_px",
         {vec2_to_json(l.endpoints_px[0]), vec2_to_json(l.endpoints_px[1])}},
        {"label", l.label}});
  }
  std::vector<double> k_row_major;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) k_row_major.push_back(q.intrinsics.k(r, c));
  }
  json out{{"intrinsics",
            {{"k", k_row_major},
             {"image_size", {q.intrinsics.width, q.intrinsics.height}}}},
           {"lines", lines}};
  if (q.prior.has_value()) {
    json prior{{"alpha", q.prior->alpha}, {"phi", q.prior->phi}};
    if (q.prior_side_length.has_value()) {
      prior["side_length"] = *q.prior_side_length;
    }
    out["prior"] = prior;
  }
  if (!q.submap.empty()) out["submap"] = q.submap;
  if (record.gt_pose.has_value()) {
    json gt = pose_to_json(*record.gt_pose);
    if (record.gt_outlier_ratio.has_value()) {
      gt["outlier_ratio"] = *record.gt_outlier_ratio;
    }
    out["gt"] = gt;
  }
  return out;
}

QueryRecord query_from_json(const json& j) {
  QueryRecord record;
  QueryInput& q = record.query;
  const json& intr = j.at("intrinsics");
  const auto k = intr.at("k").get<std::vector<double>>();
  if (k.size() != 9) throw std::runtime_error("query intrinsics need 9 entries");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) q.intrinsics.k(r, c) = k[r * 3 + c];
  }
  q.intrinsics.width = intr.at("image_size").at(0).get<int>();
  q.intrinsics.height = intr.at("image_size").at(1).get<int>();
  for (const json& jl : j.at("lines")) {
    PixelLine pl;
    pl.coeffs = vec3_from_json(jl.at("coeffs"));
    pl.endpoints = {vec2_from_json(jl.at("endpoints_px").at(0)),
                    vec2_from_json(jl.at("endpoints_px").at(1))};
    pl.label = jl.at("label").get<int>();
    const auto line = normalize_pixel_line(pl, q.intrinsics);
    if (line.has_value()) q.lines.push_back(*line);
  }
  if (j.contains("prior")) {
    AxisAngle prior;
    prior.alpha = j.at("prior").at("alpha").get<double>();
    prior.phi = j.at("prior").at("phi").get<double>();
    q.prior = prior;
    if (j.at("prior").contains("side_length")) {
      q.prior_side_length = j.at("prior").at("side_length").get<double>();
    }
  }
  if (j.contains("submap")) q.submap = j.at("submap").get<std::vector<int>>();
  if (j.contains("gt")) {
    record.gt_pose = pose_from_json(j.at("gt"));
    if (j.at("gt").contains("outlier_ratio")) {
      record.gt_outlier_ratio = j.at("gt").at("outlier_ratio").get<double>();
    }
  }
  return record;
}

}  // namespace

void write_map(const std::string& path, std::span<const Line3D> lines,
               const std::map<int, std::string>& dictionary) {
  json dict = json::array();
  for (const auto& [id, word] : dictionary) {
    dict.push_back(json{{"id", id}, {"word", word}});
  }
  json jlines = json::array();
  for (const Line3D& line : lines) {
    jlines.push_back(json{{"endpoints",
                           {vec3_to_json(line.endpoints[0]),
                            vec3_to_json(line.endpoints[1])}},
                          {"label", line.label}});
  }
  save_json(path,
            json{{"version", 1}, {"dictionary", dict}, {"lines", jlines}});
}

std::vector<Line3D> read_map(const std::string& path,
                             std::map<int, std::string>* dictionary) {
  const json j = load_json(path);
  if (j.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported map version");
  }
  if (dictionary != nullptr && j.contains("dictionary")) {
    for (const json& e : j.at("dictionary")) {
      (*dictionary)[e.at("id").get<int>()] = e.at("word").get<std::string>();
    }
  }
  std::vector<Line3D> lines;
  for (const json& jl : j.at("lines")) {
    lines.push_back(Line3D::from_endpoints(
        vec3_from_json(jl.at("endpoints").at(0)),
        vec3_from_json(jl.at("endpoints").at(1)), jl.at("label").get<int>()));
  }
  return lines;
}

void write_queries(const std::string& path,
                   std::span<const QueryRecord> queries) {
  json arr = json::array();
  for (const QueryRecord& q : queries) arr.push_back(query_to_json(q));
  save_json(path, arr);
}

std::vector<QueryRecord> read_queries(const std::string& path) {
  const json j = load_json(path);
  std::vector<QueryRecord> out;
  if (j.is_array()) {
    for (const json& e : j) out.push_back(query_from_json(e));
  } else {
    out.push_back(query_from_json(j));
  }
  return out;
}

void write_results(const std::string& path,
                   std::span<const RelocResult> results) {
  json arr = json::array();
  for (const RelocResult& r : results) {
    const Eigen::Quaterniond q(r.pose.rotation);
    arr.push_back(json{
        {"success", r.success},
        {"rotation", {q.w(), q.x(), q.y(), q.z()}},
        {"translation", vec3_to_json(r.pose.translation)},
        {"value_r", r.value_r},
        {"value_t", r.value_t},
        {"inliers", r.inliers_translation},
        {"certified", r.certified_rotation && r.certified_translation},
        {"timings_ms",
         {{"rotation", r.ms_rotation},
          {"translation", r.ms_translation},
          {"total", r.ms_total}}}});
  }
  save_json(path, arr);
}

std::vector<RelocResult> read_results(const std::string& path) {
  const json j = load_json(path);
  std::vector<RelocResult> out;
  for (const json& e : j) {
    RelocResult r;
    r.success = e.at("success").get<bool>();
    const auto& rot = e.at("rotation");
    Eigen::Quaterniond q(rot.at(0).get<double>(), rot.at(1).get<double>(),
                         rot.at(2).get<double>(), rot.at(3).get<double>());
    q.normalize();
    r.pose.rotation = q.toRotationMatrix();
    r.pose.translation = vec3_from_json(e.at("translation"));
    r.value_r = e.at("value_r").get<double>();
    r.value_t = e.at("value_t").get<double>();
    r.inliers_translation = e.at("inliers").get<int>();
    r.certified_rotation = r.certified_translation =
        e.at("certified").get<bool>();
    r.ms_rotation = e.at("timings_ms").at("rotation").get<double>();
    r.ms_translation = e.at("timings_ms").at("translation").get<double>();
    r.ms_total = e.at("timings_ms").at("total").get<double>();
    out.push_back(r);
  }
  return out;
}

LabelRemap read_label_remap(const std::string& path) {
  const json j = load_json(path);
  LabelRemap remap;
  for (const json& e : j.at("remap")) {
    remap[e.at("from").get<int>()] = e.at("to").get<int>();
  }
  return remap;
}

void write_landscape_csv(const std::string& path, const LandscapeGrid& grid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "alpha,phi,value\n";
  out.precision(17);
  for (int i = 0; i < grid.n_alpha; ++i) {
    for (int j = 0; j < grid.n_phi; ++j) {
      const auto [alpha, phi] = grid.cell_center(i, j);
      out << alpha << "," << phi << "," << grid.at(i, j) << "\n";
    }
  }
}

void write_sweep_csv(const std::string& path,
                     std::span<const SweepPoint> rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "q,recall_rot_5deg,recall_trans_5cm,recall_trans_10cm,"
         "recall_trans_15cm,median_rot_deg,median_trans_cm\n";
  out.precision(17);
  for (const SweepPoint& p : rows) {
    out << p.q << "," << p.recall_rot_5deg << "," << p.recall_trans_cm[0]
        << "," << p.recall_trans_cm[1] << "," << p.recall_trans_cm[2] << ","
        << p.median_rot_deg << "," << p.median_trans_cm << "\n";
  }
}

void write_report_csv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "metric,value\n";
  out.precision(17);
  out << "count," << report.count << "\n";
  out << "failures," << report.failures << "\n";
  out << "rot_q25_deg," << report.rotation_quantiles_deg[0] << "\n";
  out << "rot_q50_deg," << report.rotation_quantiles_deg[1] << "\n";
  out << "rot_q75_deg," << report.rotation_quantiles_deg[2] << "\n";
  out << "trans_q25_cm," << report.translation_quantiles_cm[0] << "\n";
  out << "trans_q50_cm," << report.translation_quantiles_cm[1] << "\n";
  out << "trans_q75_cm," << report.translation_quantiles_cm[2] << "\n";
  out << "recall_rot_5deg," << report.recall_rot_5deg << "\n";
  out << "recall_trans_5cm," << report.recall_trans_cm[0] << "\n";
  out << "recall_trans_10cm," << report.recall_trans_cm[1] << "\n";
  out << "recall_trans_15cm," << report.recall_trans_cm[2] << "\n";
  out << "median_outlier_ratio," << report.median_outlier_ratio << "\n";
  out << "median_ms," << report.median_ms << "\n";
}

}  // namespace satcm
