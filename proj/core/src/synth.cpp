#include "satcm/synth.hpp"

#include <cmath>
#include <random>

namespace satcm {

namespace {

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  q.normalize();
  return q.toRotationMatrix();
}

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Vector3d v(gauss(rng), gauss(rng), gauss(rng));
  return v.normalized();
}

Eigen::Vector3d perp_unit(const Eigen::Vector3d& w, double angle) {
  const Eigen::Vector3d ref =
      std::abs(w.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d b1 = w.cross(ref).normalized();
  const Eigen::Vector3d b2 = w.cross(b1).normalized();
  return std::cos(angle) * b1 + std::sin(angle) * b2;
}

int sample_label(std::mt19937_64& rng, const SceneSpec& spec) {
  if (spec.label_probs.empty()) {
    std::uniform_int_distribution<int> uni(0, spec.dictionary_size - 1);
    return uni(rng);
  }
  std::discrete_distribution<int> dist(spec.label_probs.begin(),
                                       spec.label_probs.end());
  return dist(rng);
}

}  // namespace

SyntheticScene synth_scene(const SceneSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  SyntheticScene scene;
  scene.intrinsics.k << 600, 0, 320, 0, 600, 240, 0, 0, 1;
  scene.intrinsics.width = 640;
  scene.intrinsics.height = 480;

  // Camera somewhere in the middle of the box, arbitrary orientation.
  scene.gt_pose.rotation = random_rotation(rng);
  const Eigen::Vector3d c = spec.box.center();
  const Eigen::Vector3d half = 0.5 * spec.box.sizes();
  for (int i = 0; i < 3; ++i) {
    scene.gt_pose.translation[i] = c[i] + (uni(rng) * 1.2 - 0.6) * half[i];
  }

  const int n_matched =
      std::min(spec.n_query,
               static_cast<int>(std::lround(spec.match_fraction * spec.n_query)));

  // Visible 3D segments are built by back-projecting random image segments at
  // random depths, so every planted match projects into the image exactly.
  const Eigen::Matrix3d k_inv = scene.intrinsics.k.inverse();
  auto sample_visible_line = [&](int label) {
    const double w = scene.intrinsics.width;
    const double h = scene.intrinsics.height;
    for (;;) {
      const Eigen::Vector2d p1(40.0 + uni(rng) * (w - 80.0),
                               40.0 + uni(rng) * (h - 80.0));
      const double ang = uni(rng) * 2.0 * M_PI;
      const double len = 120.0 + uni(rng) * 200.0;
      const Eigen::Vector2d p2 =
          p1 + len * Eigen::Vector2d(std::cos(ang), std::sin(ang));
      if (p2.x() < 10.0 || p2.x() > w - 10.0 || p2.y() < 10.0 ||
          p2.y() > h - 10.0) {
        continue;
      }
      const double z1 = 1.5 + uni(rng) * 2.5;
      const double z2 = 1.5 + uni(rng) * 2.5;
      const Eigen::Vector3d r1 = k_inv * Eigen::Vector3d(p1.x(), p1.y(), 1.0);
      const Eigen::Vector3d r2 = k_inv * Eigen::Vector3d(p2.x(), p2.y(), 1.0);
      const Eigen::Vector3d e1 =
          scene.gt_pose.rotation * (r1 * z1) + scene.gt_pose.translation;
      const Eigen::Vector3d e2 =
          scene.gt_pose.rotation * (r2 * z2) + scene.gt_pose.translation;
      if ((e1 - e2).norm() < 0.2) continue;
      return Line3D::from_endpoints(e1, e2, label);
    }
  };

  auto make_query_line = [&](const Line3D& line) {
    Line2D q;
    q.label = line.label;
    q.normal = *project_line_normal(line, scene.gt_pose);
    if (spec.noise_angle > 0.0) {
      const double delta = uni(rng) * spec.noise_angle;
      const Eigen::Vector3d axis = perp_unit(q.normal, uni(rng) * 2.0 * M_PI);
      q.normal = canonical_sign(
          rotate(AxisAngle::from_axis(axis, delta), q.normal).normalized());
    }
    q.endpoints_px = {*project_point_px(scene.gt_pose, scene.intrinsics,
                                        line.endpoints[0]),
                      *project_point_px(scene.gt_pose, scene.intrinsics,
                                        line.endpoints[1])};
    return q;
  };

  // Matched query lines and their map twins.
  for (int k = 0; k < n_matched; ++k) {
    const Line3D line = sample_visible_line(sample_label(rng, spec));
    scene.true_match.push_back(static_cast<int>(scene.map_lines.size()));
    scene.map_lines.push_back(line);
    scene.query.push_back(make_query_line(line));
  }
  // Unmatched query lines: visible geometry with no map twin.
  for (int k = n_matched; k < spec.n_query; ++k) {
    const Line3D line = sample_visible_line(sample_label(rng, spec));
    scene.true_match.push_back(-1);
    scene.query.push_back(make_query_line(line));
  }

  // Distractor map lines, uniform in the box.
  const int n_distractors = std::max(0, spec.n_map_lines - n_matched);
  std::uniform_real_distribution<double> half_len(0.25, 1.5);
  for (int i = 0; i < n_distractors; ++i) {
    Eigen::Vector3d p;
    for (int j = 0; j < 3; ++j) {
      p[j] = spec.box.min()[j] + uni(rng) * spec.box.sizes()[j];
    }
    const Eigen::Vector3d v = random_unit(rng);
    const double hl = half_len(rng);
    scene.map_lines.push_back(
        Line3D::from_endpoints(p - hl * v, p + hl * v, sample_label(rng, spec)));
  }

  // Planted ambiguity: for a wrong rotation R_bad, a cluster of lines sharing
  // one query line's label whose directions are all orthogonal to R_bad n_k,
  // so they all become inliers of that single sample under R_bad.
  for (int cl = 0; cl < spec.ambiguous_clusters && n_matched > 0; ++cl) {
    const int k = cl % n_matched;
    Eigen::Matrix3d r_bad;
    do {
      r_bad = random_rotation(rng);
    } while (rotation_error_deg(r_bad, scene.gt_pose.rotation) < 30.0);
    const Eigen::Vector3d w = (r_bad * scene.query[k].normal).normalized();
    for (int i = 0; i < spec.ambiguous_cluster_size; ++i) {
      const Eigen::Vector3d v = perp_unit(w, uni(rng) * 2.0 * M_PI);
      Eigen::Vector3d p;
      for (int j = 0; j < 3; ++j) {
        p[j] = spec.box.min()[j] + uni(rng) * spec.box.sizes()[j];
      }
      const double hl = half_len(rng);
      scene.map_lines.push_back(Line3D::from_endpoints(
          p - hl * v, p + hl * v, scene.query[k].label));
    }
  }

  // Outlier-ratio diagnostic under plain label association.
  const AssociationSet assoc = associate(scene.query, scene.map_lines);
  long n_true = 0;
  for (std::size_t k = 0; k < assoc.query_indices.size(); ++k) {
    const int q = assoc.query_indices[k];
    if (scene.true_match[q] < 0) continue;
    for (int m : assoc.candidates[k]) {
      if (m == scene.true_match[q]) n_true += 1;
    }
  }
  scene.outlier_ratio =
      assoc.total > 0 ? double(assoc.total - n_true) / double(assoc.total) : 0.0;
  return scene;
}

}  // namespace satcm
