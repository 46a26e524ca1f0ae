#include "satcm/map_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace satcm {

std::vector<Eigen::Vector3d> backproject_segment(const PixelLine& seg,
                                                 const FrameInput& frame,
                                                 int n_samples) {
  std::vector<Eigen::Vector3d> points;
  if (n_samples < 2) return points;
  const Eigen::Matrix3d k_inv = frame.intrinsics.k.inverse();
  const Eigen::Vector2d a = seg.endpoints[0];
  const Eigen::Vector2d b = seg.endpoints[1];
  points.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double s = n_samples == 1 ? 0.0 : double(i) / (n_samples - 1);
    const Eigen::Vector2d px = a + s * (b - a);
    const int u = static_cast<int>(std::lround(px.x()));
    const int v = static_cast<int>(std::lround(px.y()));
    if (!frame.depth.in_bounds(u, v)) continue;
    const double z = frame.depth.at(u, v);
    if (!(z > 0.0) || !std::isfinite(z)) continue;
    const Eigen::Vector3d ray = k_inv * Eigen::Vector3d(px.x(), px.y(), 1.0);
    const Eigen::Vector3d p_cam = ray / ray.z() * z;
    points.push_back(frame.pose.rotation * p_cam + frame.pose.translation);
  }
  if (points.size() < 2) points.clear();
  return points;
}

std::optional<LineFit> fit_line3d(std::span<const Eigen::Vector3d> points) {
  if (points.size() < 2) return std::nullopt;

  auto fit_once = [](std::span<const Eigen::Vector3d> pts) {
    LineFit fit;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= double(pts.size());
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (const auto& p : pts) {
      const Eigen::Vector3d d = p - centroid;
      scatter += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
    fit.point = centroid;
    fit.direction = es.eigenvectors().col(2);  // largest eigenvalue
    double ss = 0.0;
    for (const auto& p : pts) {
      const Eigen::Vector3d d = p - centroid;
      ss += (d - d.dot(fit.direction) * fit.direction).squaredNorm();
    }
    fit.rms = std::sqrt(ss / double(pts.size()));
    const double gap =
        es.eigenvalues()(2) > 0.0 ? es.eigenvalues()(1) / es.eigenvalues()(2)
                                  : 1.0;
    return std::pair{fit, gap};
  };

  auto [fit, gap] = fit_once(points);

  // One trimming pass at 3x the median perpendicular distance.
  std::vector<double> dist(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector3d d = points[i] - fit.point;
    dist[i] = (d - d.dot(fit.direction) * fit.direction).norm();
  }
  std::vector<double> sorted = dist;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                   sorted.end());
  const double median = sorted[sorted.size() / 2];
  if (median > 1e-12) {
    std::vector<Eigen::Vector3d> kept;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (dist[i] <= 3.0 * median) kept.push_back(points[i]);
    }
    if (kept.size() >= 2 && kept.size() < points.size()) {
      std::tie(fit, gap) = fit_once(kept);
    }
  }

  // No dominant direction and a poor residual: reject.
  if (gap > 0.5 && fit.rms > 0.05) return std::nullopt;

  double s_lo = std::numeric_limits<double>::infinity();
  double s_hi = -s_lo;
  for (const auto& p : points) {
    const double s = (p - fit.point).dot(fit.direction);
    s_lo = std::min(s_lo, s);
    s_hi = std::max(s_hi, s);
  }
  fit.endpoints = {fit.point + s_lo * fit.direction,
                   fit.point + s_hi * fit.direction};
  return fit;
}

std::optional<Line3D> select_hypothesis(const PixelLine& seg,
                                        const FrameInput& frame,
                                        const MapBuilderConfig& config) {
  const Eigen::Vector2d dir = seg.endpoints[1] - seg.endpoints[0];
  const double len = dir.norm();
  if (len < 1e-9) return std::nullopt;
  const Eigen::Vector2d normal(-dir.y() / len, dir.x() / len);

  std::optional<Line3D> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (double offset : config.perturbations) {
    PixelLine moved = seg;
    moved.endpoints[0] += offset * normal;
    moved.endpoints[1] += offset * normal;
    const auto points = backproject_segment(moved, frame, config.n_samples);
    if (points.empty()) continue;
    const auto fit = fit_line3d(points);
    if (!fit.has_value() || fit->rms >= config.rms_max) continue;
    double mean_depth = 0.0;
    const Eigen::Matrix3d rt = frame.pose.rotation.transpose();
    for (const auto& p : points) {
      mean_depth += (rt * (p - frame.pose.translation)).z();
    }
    mean_depth /= double(points.size());
    const double score = mean_depth + config.lambda_px * std::abs(offset);
    if (score < best_score) {
      best_score = score;
      Line3D line = Line3D::from_endpoints(fit->endpoints[0],
                                           fit->endpoints[1], seg.label);
      line.point = fit->point;
      best = line;
    }
  }
  return best;
}

LineGraph build_line_graph(std::span<const Line3D> candidates, double delta_r,
                           double delta_t) {
  LineGraph graph;
  graph.vertices.assign(candidates.begin(), candidates.end());
  graph.adjacency.resize(candidates.size());
  const double cos_thresh = std::cos(delta_r);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      const Line3D& a = candidates[i];
      const Line3D& b = candidates[j];
      // Directions up to sign.
      if (std::abs(a.direction.dot(b.direction)) <= cos_thresh) continue;
      const Eigen::Vector3d d = a.point - b.point;
      // The printed proximity test projects with one side's direction, which
      // is asymmetric; require it both ways so the graph is undirected.
      const double da = (d - a.direction.dot(d) * a.direction).norm();
      const double db = (d - b.direction.dot(d) * b.direction).norm();
      if (da < delta_t && db < delta_t) {
        graph.adjacency[i].push_back(static_cast<int>(j));
        graph.adjacency[j].push_back(static_cast<int>(i));
      }
    }
  }
  return graph;
}

std::vector<Line3D> cluster_lines(std::span<const Line3D> candidates,
                                  double delta_r, double delta_t,
                                  int delta_d) {
  const LineGraph graph = build_line_graph(candidates, delta_r, delta_t);
  const std::size_t n = candidates.size();
  std::vector<bool> removed(n, false);
  std::vector<int> degree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    degree[i] = static_cast<int>(graph.adjacency[i].size());
  }

  std::vector<Line3D> registered;
  for (;;) {
    int v_max = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (removed[i]) continue;
      if (v_max < 0 || degree[i] > degree[v_max]) v_max = static_cast<int>(i);
    }
    if (v_max < 0 || degree[v_max] < delta_d) break;

    // Closed neighborhood, V_max included.
    std::vector<int> members = {v_max};
    for (int nb : graph.adjacency[v_max]) {
      if (!removed[nb]) members.push_back(nb);
    }
    for (int m : members) {
      removed[m] = true;
      for (int nb : graph.adjacency[m]) {
        if (!removed[nb]) degree[nb] -= 1;
      }
    }

    const Line3D& rep = candidates[v_max];
    double s_lo = std::numeric_limits<double>::infinity();
    double s_hi = -s_lo;
    std::vector<int> labels;
    for (int m : members) {
      labels.push_back(candidates[m].label);
      for (const auto& e : candidates[m].endpoints) {
        const double s = (e - rep.point).dot(rep.direction);
        s_lo = std::min(s_lo, s);
        s_hi = std::max(s_hi, s);
      }
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    for (int label : labels) {
      Line3D line = Line3D::from_endpoints(rep.point + s_lo * rep.direction,
                                           rep.point + s_hi * rep.direction,
                                           label);
      line.point = rep.point;
      line.direction = rep.direction;
      registered.push_back(line);
    }
  }
  return registered;
}

std::vector<Line3D> build_map(std::span<const FrameInput> frames,
                              const MapBuilderConfig& config) {
  std::vector<Line3D> candidates;
  for (const FrameInput& frame : frames) {
    for (const PixelLine& seg : frame.segments) {
      const auto line = select_hypothesis(seg, frame, config);
      if (line.has_value()) candidates.push_back(*line);
    }
  }
  return cluster_lines(candidates, config.delta_r, config.delta_t,
                       config.delta_d);
}

}  // namespace satcm
