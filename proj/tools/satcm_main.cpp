// Command-line front end: solve, build-map, synth, landscape, eval, sweep-q.
// Exit codes: 0 success, 1 invalid input, 2 solver failure (non-certified).

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "satcm/eval.hpp"
#include "satcm/io.hpp"
#include "satcm/map_builder.hpp"
#include "satcm/pipeline.hpp"
#include "satcm/synth.hpp"

namespace {

using namespace satcm;

struct CommonOptions {
  PipelineConfig config;
  std::string saturation_kind = "likelihood";
  std::string translation_kind = "truncated";
  std::string prior_side = "none";
  std::string remap_path;
  int workers = 1;
};

void add_config_flags(CLI::App& app, CommonOptions& opt) {
  app.add_option("--saturation.kind", opt.saturation_kind,
                 "identity | truncated | likelihood");
  app.add_option("--saturation.q", opt.config.saturation_q);
  app.add_option("--rotation.epsilon_r", opt.config.rotation.epsilon_r);
  app.add_option("--rotation.gap", opt.config.rotation.gap);
  app.add_option("--rotation.min_cube_width",
                 opt.config.rotation.min_cube_width);
  app.add_option("--rotation.max_nodes", opt.config.rotation.max_nodes);
  app.add_option("--rotation.prior_side_length", opt.prior_side,
                 "pi | pi/2 | none");
  app.add_option("--translation.epsilon_t", opt.config.translation.epsilon_t);
  app.add_option("--translation.gap", opt.config.translation.gap);
  app.add_option("--translation.min_cube_width",
                 opt.config.translation.min_cube_width);
  app.add_option("--translation.saturation_kind", opt.translation_kind);
  app.add_option("--translation.q", opt.config.translation_q);
  app.add_option("--pipeline.min_segment_length_px",
                 opt.config.min_segment_length_px);
  app.add_option("--remap", opt.remap_path, "label remap JSON");
  app.add_option("--workers", opt.workers, "parallel queries");
}

PipelineConfig resolve_config(CommonOptions& opt) {
  PipelineConfig config = opt.config;
  config.saturation_kind = saturation_kind_from_string(opt.saturation_kind);
  config.translation_saturation_kind =
      saturation_kind_from_string(opt.translation_kind);
  if (opt.prior_side == "pi") {
    config.prior_side_length = M_PI;
  } else if (opt.prior_side == "pi/2") {
    config.prior_side_length = M_PI / 2.0;
  } else if (opt.prior_side != "none") {
    throw CLI::ValidationError("--rotation.prior_side_length",
                               "expected pi, pi/2 or none");
  }
  return config;
}

std::vector<RelocResult> solve_batch(const std::vector<QueryRecord>& queries,
                                     const std::vector<Line3D>& map_lines,
                                     const PipelineConfig& config,
                                     const LabelRemap& remap, int workers) {
  std::vector<RelocResult> results(queries.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < queries.size(); ++i) {
      results[i] = relocalize(queries[i].query, map_lines, config, remap);
    }
    return results;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= queries.size()) break;
      results[i] = relocalize(queries[i].query, map_lines, config, remap);
    }
  };
  std::vector<std::future<void>> futures;
  for (int w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, worker));
  }
  for (auto& f : futures) f.get();
  return results;  // input order regardless of completion order
}

int cmd_solve(const std::string& map_path, const std::string& queries_path,
              const std::string& out_path, CommonOptions& opt) {
  const PipelineConfig config = resolve_config(opt);
  const std::vector<Line3D> map_lines = read_map(map_path);
  const std::vector<QueryRecord> queries = read_queries(queries_path);
  LabelRemap remap;
  if (!opt.remap_path.empty()) remap = read_label_remap(opt.remap_path);

  const std::vector<RelocResult> results =
      solve_batch(queries, map_lines, config, remap, opt.workers);
  write_results(out_path, results);

  int code = 0;
  for (const RelocResult& r : results) {
    if (!r.success || !r.certified_rotation) code = 2;
    std::cout << (r.success ? "ok" : "fail") << " value_r=" << r.value_r
              << " value_t=" << r.value_t << " inliers="
              << r.inliers_translation << " ms=" << r.ms_total << "\n";
  }
  return code;
}

DepthMap depth_from_json(const nlohmann::json& j,
                         const std::filesystem::path& base) {
  DepthMap depth;
  depth.width = j.at("width").get<int>();
  depth.height = j.at("height").get<int>();
  if (j.contains("data")) {
    depth.data = j.at("data").get<std::vector<float>>();
  } else {
    const std::filesystem::path file = base / j.at("file").get<std::string>();
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open depth raster " + file.string());
    depth.data.resize(static_cast<std::size_t>(depth.width) * depth.height);
    in.read(reinterpret_cast<char*>(depth.data.data()),
            static_cast<std::streamsize>(depth.data.size() * sizeof(float)));
    if (!in) throw std::runtime_error("short depth raster " + file.string());
  }
  if (depth.data.size() != static_cast<std::size_t>(depth.width) * depth.height) {
    throw std::runtime_error("depth raster size mismatch");
  }
  return depth;
}

int cmd_build_map(const std::string& frames_path, const std::string& out_path,
                  const MapBuilderConfig& config) {
  std::ifstream in(frames_path);
  if (!in) throw std::runtime_error("cannot open " + frames_path);
  nlohmann::json j;
  in >> j;
  const std::filesystem::path base =
      std::filesystem::path(frames_path).parent_path();

  std::vector<FrameInput> frames;
  for (const auto& jf : j.at("frames")) {
    FrameInput frame;
    const auto& jp = jf.at("pose");
    const auto& rot = jp.at("rotation");
    Eigen::Quaterniond q(rot.at(0).get<double>(), rot.at(1).get<double>(),
                         rot.at(2).get<double>(), rot.at(3).get<double>());
    q.normalize();
    frame.pose.rotation = q.toRotationMatrix();
    for (int i = 0; i < 3; ++i) {
      frame.pose.translation[i] = jp.at("translation").at(i).get<double>();
    }
    const auto k = jf.at("intrinsics").at("k").get<std::vector<double>>();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) frame.intrinsics.k(r, c) = k[r * 3 + c];
    }
    frame.intrinsics.width = jf.at("intrinsics").at("image_size").at(0).get<int>();
    frame.intrinsics.height =
        jf.at("intrinsics").at("image_size").at(1).get<int>();
    frame.depth = depth_from_json(jf.at("depth"), base);
    for (const auto& js : jf.at("segments")) {
      PixelLine seg;
      seg.endpoints = {Eigen::Vector2d(js.at("endpoints_px").at(0).at(0),
                                       js.at("endpoints_px").at(0).at(1)),
                       Eigen::Vector2d(js.at("endpoints_px").at(1).at(0),
                                       js.at("endpoints_px").at(1).at(1))};
      seg.label = js.at("label").get<int>();
      const Eigen::Vector3d a(seg.endpoints[0].x(), seg.endpoints[0].y(), 1.0);
      const Eigen::Vector3d b(seg.endpoints[1].x(), seg.endpoints[1].y(), 1.0);
      seg.coeffs = a.cross(b);
      frame.segments.push_back(seg);
    }
    frames.push_back(std::move(frame));
  }

  const std::vector<Line3D> map_lines = build_map(frames, config);
  write_map(out_path, map_lines);
  std::cout << "registered " << map_lines.size() << " lines from "
            << frames.size() << " frames\n";
  return 0;
}

int cmd_synth(const SceneSpec& spec, const std::string& out_dir) {
  const SyntheticScene scene = synth_scene(spec);
  std::filesystem::create_directories(out_dir);
  write_map(out_dir + "/map.json", scene.map_lines);

  QueryRecord record;
  record.query.lines = scene.query;
  record.query.intrinsics = scene.intrinsics;
  record.gt_pose = scene.gt_pose;
  record.gt_outlier_ratio = scene.outlier_ratio;
  const std::vector<QueryRecord> queries = {record};
  write_queries(out_dir + "/queries.json", queries);
  std::cout << "map lines: " << scene.map_lines.size()
            << ", query lines: " << scene.query.size()
            << ", outlier ratio: " << scene.outlier_ratio << "\n";
  return 0;
}

std::vector<Association> associations_for_query(
    const QueryInput& query, const std::vector<Line3D>& map_lines,
    const LabelRemap& remap) {
  const AssociationSet assoc = associate(query.lines, map_lines, remap);
  std::vector<Association> out;
  for (std::size_t k = 0; k < assoc.query_indices.size(); ++k) {
    const Line2D& line = query.lines[assoc.query_indices[k]];
    for (int m : assoc.candidates[k]) {
      out.emplace_back(static_cast<int>(k), m, line.normal,
                       map_lines[m].direction);
    }
  }
  return out;
}

int cmd_landscape(const std::string& map_path, const std::string& queries_path,
                  int index, double resolution_deg,
                  const std::vector<std::string>& kinds,
                  const std::string& out_prefix, CommonOptions& opt) {
  const PipelineConfig config = resolve_config(opt);
  const std::vector<Line3D> map_lines = read_map(map_path);
  const std::vector<QueryRecord> queries = read_queries(queries_path);
  if (index < 0 || index >= static_cast<int>(queries.size())) {
    throw std::runtime_error("query index out of range");
  }
  LabelRemap remap;
  if (!opt.remap_path.empty()) remap = read_label_remap(opt.remap_path);
  const std::vector<Association> assoc =
      associations_for_query(queries[index].query, map_lines, remap);
  for (const std::string& kind_name : kinds) {
    SaturationSpec spec = config.rotation_saturation();
    spec.kind = saturation_kind_from_string(kind_name);
    const LandscapeGrid grid =
        landscape(assoc, spec, resolution_deg * M_PI / 180.0,
                  config.rotation.epsilon_r);
    write_landscape_csv(out_prefix + "_" + kind_name + ".csv", grid);
  }
  return 0;
}

int cmd_eval(const std::string& results_path, const std::string& queries_path,
             const std::string& out_path) {
  const std::vector<RelocResult> results = read_results(results_path);
  const std::vector<QueryRecord> queries = read_queries(queries_path);
  if (results.size() != queries.size()) {
    throw std::runtime_error("results/queries length mismatch");
  }
  std::vector<Pose> gt;
  std::vector<double> ratios;
  for (const QueryRecord& q : queries) {
    if (!q.gt_pose.has_value()) {
      throw std::runtime_error("queries carry no ground truth");
    }
    gt.push_back(*q.gt_pose);
    if (q.gt_outlier_ratio.has_value()) ratios.push_back(*q.gt_outlier_ratio);
  }
  const EvalReport report = evaluate(results, gt, ratios);
  if (!out_path.empty()) write_report_csv(out_path, report);
  std::cout << "rotation quantiles (deg): " << report.rotation_quantiles_deg[0]
            << "/" << report.rotation_quantiles_deg[1] << "/"
            << report.rotation_quantiles_deg[2] << "\n"
            << "translation quantiles (cm): "
            << report.translation_quantiles_cm[0] << "/"
            << report.translation_quantiles_cm[1] << "/"
            << report.translation_quantiles_cm[2] << "\n"
            << "recall@5deg: " << 100.0 * report.recall_rot_5deg << "%\n"
            << "recall@5/10/15cm: " << 100.0 * report.recall_trans_cm[0] << "/"
            << 100.0 * report.recall_trans_cm[1] << "/"
            << 100.0 * report.recall_trans_cm[2] << "%\n"
            << "median outlier ratio: " << report.median_outlier_ratio << "\n"
            << "median ms: " << report.median_ms << "\n";
  return 0;
}

int cmd_sweep_q(const std::string& map_path, const std::string& queries_path,
                const std::vector<double>& q_values,
                const std::string& out_path, CommonOptions& opt) {
  const PipelineConfig base = resolve_config(opt);
  const std::vector<Line3D> map_lines = read_map(map_path);
  const std::vector<QueryRecord> queries = read_queries(queries_path);
  LabelRemap remap;
  if (!opt.remap_path.empty()) remap = read_label_remap(opt.remap_path);

  std::vector<Pose> gt;
  std::vector<double> ratios;
  for (const QueryRecord& q : queries) {
    if (!q.gt_pose.has_value()) {
      throw std::runtime_error("sweep-q needs ground truth in the query file");
    }
    gt.push_back(*q.gt_pose);
    if (q.gt_outlier_ratio.has_value()) ratios.push_back(*q.gt_outlier_ratio);
  }

  std::vector<SweepPoint> rows;
  for (double q : q_values) {
    PipelineConfig config = base;
    config.saturation_kind = SaturationKind::likelihood;
    config.saturation_q = q;
    config.translation_q = q;
    const std::vector<RelocResult> results =
        solve_batch(queries, map_lines, config, remap, opt.workers);
    const EvalReport report = evaluate(results, gt, ratios);
    SweepPoint row;
    row.q = q;
    row.recall_rot_5deg = report.recall_rot_5deg;
    row.recall_trans_cm = report.recall_trans_cm;
    row.median_rot_deg = report.rotation_quantiles_deg[1];
    row.median_trans_cm = report.translation_quantiles_cm[1];
    rows.push_back(row);
    std::cout << "q=" << q << " recall@5deg=" << 100.0 * row.recall_rot_5deg
              << "%\n";
  }
  write_sweep_csv(out_path, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Saturated consensus pose estimation over semantic line maps"};
  app.require_subcommand(1);

  CommonOptions opt;

  // solve
  auto* solve = app.add_subcommand("solve", "relocalize queries against a map");
  std::string map_path, queries_path, out_path = "results.json";
  solve->add_option("--map", map_path)->required();
  solve->add_option("--queries", queries_path)->required();
  solve->add_option("--out", out_path);
  add_config_flags(*solve, opt);

  // build-map
  auto* build = app.add_subcommand("build-map", "build a line map from frames");
  std::string frames_path, map_out = "map.json";
  MapBuilderConfig map_config;
  build->add_option("--frames", frames_path)->required();
  build->add_option("--out", map_out);
  build->add_option("--map.n_samples", map_config.n_samples);
  build->add_option("--map.lambda_px", map_config.lambda_px);
  build->add_option("--map.rms_max", map_config.rms_max);
  double delta_r_deg = 5.0;
  build->add_option("--map.delta_r_deg", delta_r_deg);
  build->add_option("--map.delta_t", map_config.delta_t);
  build->add_option("--map.delta_d", map_config.delta_d);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  SceneSpec spec;
  std::string out_dir = "scene";
  synth->add_option("--seed", spec.seed);
  synth->add_option("--map-lines", spec.n_map_lines);
  synth->add_option("--dictionary", spec.dictionary_size);
  synth->add_option("--queries", spec.n_query);
  synth->add_option("--noise", spec.noise_angle, "rad, on query normals");
  synth->add_option("--match-fraction", spec.match_fraction);
  synth->add_option("--ambiguous-clusters", spec.ambiguous_clusters);
  synth->add_option("--cluster-size", spec.ambiguous_cluster_size);
  synth->add_option("--out-dir", out_dir);

  // landscape
  auto* land = app.add_subcommand("landscape", "objective grid over the axis sphere");
  std::string land_map, land_queries, land_prefix = "landscape";
  int land_index = 0;
  double land_res_deg = 1.0;
  std::vector<std::string> land_kinds = {"identity", "likelihood"};
  land->add_option("--map", land_map)->required();
  land->add_option("--queries", land_queries)->required();
  land->add_option("--index", land_index);
  land->add_option("--resolution-deg", land_res_deg);
  land->add_option("--kinds", land_kinds)->delimiter(',');
  land->add_option("--out-prefix", land_prefix);
  add_config_flags(*land, opt);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score results against ground truth");
  std::string eval_results, eval_queries, eval_out;
  eval_cmd->add_option("--results", eval_results)->required();
  eval_cmd->add_option("--queries", eval_queries)->required();
  eval_cmd->add_option("--out", eval_out, "report CSV");

  // sweep-q
  auto* sweep = app.add_subcommand("sweep-q", "sensitivity curve over q");
  std::string sweep_map, sweep_queries, sweep_out = "sweep.csv";
  std::vector<double> sweep_qs = {0.6, 0.7, 0.8, 0.9, 0.99};
  sweep->add_option("--map", sweep_map)->required();
  sweep->add_option("--queries", sweep_queries)->required();
  sweep->add_option("--q", sweep_qs)->delimiter(',');
  sweep->add_option("--out", sweep_out);
  add_config_flags(*sweep, opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(map_path, queries_path, out_path, opt);
    if (build->parsed()) {
      map_config.delta_r = delta_r_deg * M_PI / 180.0;
      return cmd_build_map(frames_path, map_out, map_config);
    }
    if (synth->parsed()) return cmd_synth(spec, out_dir);
    if (land->parsed()) {
      return cmd_landscape(land_map, land_queries, land_index, land_res_deg,
                           land_kinds, land_prefix, opt);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval_results, eval_queries, eval_out);
    if (sweep->parsed()) {
      return cmd_sweep_q(sweep_map, sweep_queries, sweep_qs, sweep_out, opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
