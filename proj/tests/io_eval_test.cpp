#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "satcm/eval.hpp"
#include "satcm/io.hpp"
#include "satcm/synth.hpp"
#include "support/oracles.hpp"

using namespace satcm;

TEST_SUITE_BEGIN("io_eval");

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("satcm_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("map file round trip") {
  TempDir dir;
  SceneSpec spec;
  spec.seed = 9;
  spec.n_map_lines = 40;
  const SyntheticScene scene = synth_scene(spec);
  write_map(dir.file("map.json"), scene.map_lines, {{0, "chair"}, {1, "table"}});
  std::map<int, std::string> dict;
  const std::vector<Line3D> back = read_map(dir.file("map.json"), &dict);
  REQUIRE(back.size() == scene.map_lines.size());
  CHECK(dict.at(0) == "chair");
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].label == scene.map_lines[i].label);
    for (int e = 0; e < 2; ++e) {
      CHECK((back[i].endpoints[e] - scene.map_lines[i].endpoints[e]).norm() <
            1e-12);
    }
    CHECK((back[i].point - scene.map_lines[i].point).norm() < 1e-12);
  }
}

TEST_CASE("query file round trip") {
  TempDir dir;
  SceneSpec spec;
  spec.seed = 10;
  spec.n_query = 6;
  spec.n_map_lines = 30;
  const SyntheticScene scene = synth_scene(spec);
  QueryRecord record;
  record.query.lines = scene.query;
  record.query.intrinsics = scene.intrinsics;
  record.query.prior = AxisAngle{0.4, 1.2, 0.0};
  record.query.prior_side_length = M_PI / 2.0;
  record.query.submap = {0, 2, 4};
  record.gt_pose = scene.gt_pose;
  record.gt_outlier_ratio = scene.outlier_ratio;
  const std::vector<QueryRecord> queries = {record};
  write_queries(dir.file("queries.json"), queries);
  const std::vector<QueryRecord> back = read_queries(dir.file("queries.json"));
  REQUIRE(back.size() == 1);
  const QueryInput& q = back[0].query;
  REQUIRE(q.lines.size() == scene.query.size());
  for (std::size_t i = 0; i < q.lines.size(); ++i) {
    CHECK((q.lines[i].normal - scene.query[i].normal).norm() < 1e-12);
    CHECK(q.lines[i].label == scene.query[i].label);
  }
  CHECK(q.prior.has_value());
  CHECK(q.prior->alpha == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(q.submap == std::vector<int>{0, 2, 4});
  REQUIRE(back[0].gt_pose.has_value());
  CHECK(rotation_error_deg(back[0].gt_pose->rotation,
                           scene.gt_pose.rotation) < 1e-6);
  CHECK((back[0].gt_pose->translation - scene.gt_pose.translation).norm() <
        1e-12);
  CHECK(*back[0].gt_outlier_ratio ==
        doctest::Approx(scene.outlier_ratio).epsilon(1e-12));
}

TEST_CASE("results file round trip") {
  TempDir dir;
  RelocResult r;
  r.success = true;
  r.pose.rotation =
      rotation_matrix(AxisAngle::from_axis({0.3, -0.5, 0.8}, 1.1));
  r.pose.translation = {0.25, -1.5, 3.0};
  r.value_r = 12.5;
  r.value_t = 4.0;
  r.inliers_translation = 9;
  r.certified_rotation = r.certified_translation = true;
  r.ms_rotation = 12.0;
  r.ms_translation = 3.5;
  r.ms_total = 16.0;
  const std::vector<RelocResult> results = {r};
  write_results(dir.file("results.json"), results);
  const std::vector<RelocResult> back = read_results(dir.file("results.json"));
  REQUIRE(back.size() == 1);
  CHECK(back[0].success);
  CHECK(rotation_error_deg(back[0].pose.rotation, r.pose.rotation) < 1e-6);
  CHECK((back[0].pose.translation - r.pose.translation).norm() < 1e-12);
  CHECK(back[0].value_r == doctest::Approx(12.5).epsilon(1e-12));
  CHECK(back[0].inliers_translation == 9);
}

TEST_CASE("label remap file") {
  TempDir dir;
  {
    std::ofstream out(dir.file("remap.json"));
    out << R"({"remap": [{"from": 9, "to": 3}, {"from": 12, "to": 3}]})";
  }
  const LabelRemap remap = read_label_remap(dir.file("remap.json"));
  CHECK(remap.at(9) == 3);
  CHECK(remap.at(12) == 3);
  CHECK(remap.size() == 2);
}

TEST_CASE("synthetic scenes are seed deterministic") {
  SceneSpec spec;
  spec.seed = 77;
  spec.n_query = 8;
  spec.n_map_lines = 50;
  spec.noise_angle = 0.01;
  const SyntheticScene a = synth_scene(spec);
  const SyntheticScene b = synth_scene(spec);
  REQUIRE(a.map_lines.size() == b.map_lines.size());
  for (std::size_t i = 0; i < a.map_lines.size(); ++i) {
    CHECK(a.map_lines[i].endpoints[0] == b.map_lines[i].endpoints[0]);
    CHECK(a.map_lines[i].endpoints[1] == b.map_lines[i].endpoints[1]);
  }
  CHECK(a.gt_pose.rotation == b.gt_pose.rotation);
  CHECK(a.gt_pose.translation == b.gt_pose.translation);
  for (std::size_t i = 0; i < a.query.size(); ++i) {
    CHECK(a.query[i].normal == b.query[i].normal);
  }
  CHECK(a.outlier_ratio == b.outlier_ratio);
}

TEST_CASE("quantile matches the reference implementation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v;
    const int n = 1 + static_cast<int>(uni(rng) / 2.0);
    for (int i = 0; i < n; ++i) v.push_back(uni(rng));
    for (double p : {0.25, 0.5, 0.75}) {
      CHECK(quantile(v, p) ==
            doctest::Approx(oracles::quantile_ref(v, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("evaluate on known error lists") {
  auto make_result = [](const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
    RelocResult out;
    out.success = true;
    out.pose = {r, t};
    return out;
  };
  const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();

  SUBCASE("all exact") {
    std::vector<RelocResult> results(4, make_result(eye, {1, 2, 3}));
    std::vector<Pose> gt(4, Pose{eye, {1, 2, 3}});
    const EvalReport report = evaluate(results, gt);
    for (double q : report.rotation_quantiles_deg) CHECK(q < 1e-9);
    for (double q : report.translation_quantiles_cm) CHECK(q < 1e-9);
    CHECK(report.recall_rot_5deg == 1.0);
    CHECK(report.recall_trans_cm[0] == 1.0);
  }
  SUBCASE("rotation errors 1, 3, 7 degrees give recall 2/3") {
    std::vector<RelocResult> results;
    std::vector<Pose> gt;
    for (double deg : {1.0, 3.0, 7.0}) {
      const Eigen::Matrix3d r = rotation_matrix(
          AxisAngle::from_axis({0, 0, 1}, deg * M_PI / 180.0));
      results.push_back(make_result(r, {0, 0, 0}));
      gt.push_back(Pose{eye, {0, 0, 0}});
    }
    const EvalReport report = evaluate(results, gt);
    CHECK(report.recall_rot_5deg == doctest::Approx(2.0 / 3.0));
    CHECK(report.rotation_quantiles_deg[1] == doctest::Approx(3.0).epsilon(1e-9));
  }
  SUBCASE("length mismatch throws") {
    std::vector<RelocResult> results(2);
    std::vector<Pose> gt(3);
    CHECK_THROWS(evaluate(results, gt));
  }
  SUBCASE("failures count against recall") {
    std::vector<RelocResult> results(2, make_result(eye, {0, 0, 0}));
    results[1].success = false;
    std::vector<Pose> gt(2, Pose{eye, {0, 0, 0}});
    const EvalReport report = evaluate(results, gt);
    CHECK(report.recall_rot_5deg == doctest::Approx(0.5));
    CHECK(report.failures == 1);
  }
}

TEST_CASE("landscape of a single exact association peaks at the true axis") {
  const auto instance = oracles::planted_rotation_instance(3, 1, 0);
  const SaturationSpec spec{SaturationKind::likelihood, 0.9, 0.015, 1.0};
  const LandscapeGrid grid =
      landscape(instance.assoc, spec, 2.0 * M_PI / 180.0, 0.015);
  for (double v : grid.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  // One association is satisfiable at many axes; the cell holding the true
  // search axis must be on the maximal ridge.
  const AxisAngle pose_axis = AxisAngle::from_matrix(instance.r_gt);
  const auto [alpha, phi] = xyz_to_polar(-pose_axis.axis());
  const int i = std::min(grid.n_alpha - 1,
                         static_cast<int>(alpha / grid.d_alpha));
  const int j = std::min(grid.n_phi - 1, static_cast<int>(phi / grid.d_phi));
  CHECK(grid.at(i, j) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("landscape CSV output") {
  TempDir dir;
  const auto instance = oracles::planted_rotation_instance(4, 3, 2);
  const SaturationSpec spec{SaturationKind::identity, 0.9, 0.015, 1.0};
  const LandscapeGrid grid =
      landscape(instance.assoc, spec, 10.0 * M_PI / 180.0, 0.015);
  write_landscape_csv(dir.file("land.csv"), grid);
  std::ifstream in(dir.file("land.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "alpha,phi,value");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == grid.n_alpha * grid.n_phi);
}

TEST_SUITE_END();
