#pragma once

#include <optional>
#include <span>
#include <vector>

#include "satcm/geometry.hpp"

namespace satcm {

// Dense z-depth raster in meters; zero or negative entries mean no depth.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // row-major

  float at(int u, int v) const { return data[v * width + u]; }
  bool in_bounds(int u, int v) const {
    return u >= 0 && u < width && v >= 0 && v < height;
  }
};

struct FrameInput {
  Pose pose;
  Intrinsics intrinsics;
  DepthMap depth;
  std::vector<PixelLine> segments;
};

struct MapBuilderConfig {
  int n_samples = 32;             // samples along each 2D segment
  std::vector<double> perturbations = {0.0, 1.0, -1.0, 2.0, -2.0};  // px
  double lambda_px = 0.02;        // m per px of perturbation in the score
  double rms_max = 0.02;          // m, fit gate
  double delta_r = 5.0 * M_PI / 180.0;  // parallel threshold, rad
  double delta_t = 0.05;          // proximity threshold, m
  int delta_d = 3;                // degree threshold
};

// Samples the segment, looks up depth and lifts the valid samples to world
// coordinates. Fewer than 2 valid samples: the segment is skipped (empty).
std::vector<Eigen::Vector3d> backproject_segment(const PixelLine& seg,
                                                 const FrameInput& frame,
                                                 int n_samples);

struct LineFit {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
  double rms = 0.0;
  std::array<Eigen::Vector3d, 2> endpoints = {Eigen::Vector3d::Zero(),
                                              Eigen::Vector3d::Zero()};
};

// Total-least-squares 3D line fit (centroid + principal direction) with one
// trimming pass at 3x the median perpendicular distance. nullopt when the
// scatter has no dominant direction and the residual stays large.
std::optional<LineFit> fit_line3d(std::span<const Eigen::Vector3d> points);

// Evaluates perturbed copies of the segment and picks the hypothesis with the
// smallest mean depth plus perturbation penalty among those passing the rms
// gate (foreground-over-background selection).
std::optional<Line3D> select_hypothesis(const PixelLine& seg,
                                        const FrameInput& frame,
                                        const MapBuilderConfig& config);

// Graph over candidate lines with edges between parallel, mutually proximate
// pairs (thresholds delta_r, delta_t).
struct LineGraph {
  std::vector<Line3D> vertices;
  std::vector<std::vector<int>> adjacency;
};

LineGraph build_line_graph(std::span<const Line3D> candidates, double delta_r,
                           double delta_t);

// Greedy max-degree clustering: repeatedly removes the closed neighborhood of
// the highest-degree vertex and registers one line per unique label in it,
// with endpoints merged as the extremal axis projections of the members.
std::vector<Line3D> cluster_lines(std::span<const Line3D> candidates,
                                  double delta_r, double delta_t, int delta_d);

// Full per-frame pipeline: hypothesis selection for every segment, then
// clustering across the accumulated candidates.
std::vector<Line3D> build_map(std::span<const FrameInput> frames,
                              const MapBuilderConfig& config);

}  // namespace satcm
