#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "satcm/geometry.hpp"
#include "satcm/interval_set.hpp"
#include "satcm/saturation.hpp"

namespace satcm {

// Rotation-stage inlier prepared for translation estimation: the rotated
// normal projected onto the null space of the map direction, so the residual
// is invariant to the choice of anchor point on the map line.
struct TransAssociation {
  int query_index = 0;
  Eigen::Vector3d n_star = Eigen::Vector3d::UnitX();
  Eigen::Vector3d p = Eigen::Vector3d::Zero();  // map-line anchor
  double const_a = 0.0;                         // n_star . p
  std::array<Eigen::Vector3d, 2> endpoints = {Eigen::Vector3d::Zero(),
                                              Eigen::Vector3d::Zero()};

  TransAssociation() = default;
  TransAssociation(int query, const Eigen::Vector3d& n_star_in,
                   const Eigen::Vector3d& anchor,
                   const std::array<Eigen::Vector3d, 2>& segment);
};

// normalize(n - (n.v) v); nullopt when n is nearly parallel to v.
std::optional<Eigen::Vector3d> project_normal(const Eigen::Vector3d& n_rotated,
                                              const Eigen::Vector3d& v_map);

// Rectangle over the two branched translation axes (solver-internal frame
// where x is the distinguished axis).
struct TransCube {
  double y_lo = 0.0, y_hi = 0.0;
  double z_lo = 0.0, z_hi = 0.0;

  double width() const;
  std::array<TransCube, 4> split() const;
};

// Admissible t_x set of one association for a fixed (t_y, t_z)...
IntervalSet trans_theta_intervals(const TransAssociation& a, double t_y,
                                  double t_z, const Interval& x_range,
                                  double epsilon_t);
// ...and relaxed over a (t_y, t_z) rectangle, with the linear form bounded by
// its values at the four vertices.
IntervalSet trans_theta_intervals(const TransAssociation& a,
                                  const TransCube& rect,
                                  const Interval& x_range, double epsilon_t);

struct TranslationConfig {
  double epsilon_t = 0.03;       // meters
  double gap = 1e-6;
  double min_cube_width = 0.01;  // meters
  long max_nodes = 2'000'000;
};

struct TranslationCandidate {
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  double value = 0.0;
  std::vector<int> inliers;  // indices into the association list
};

struct TranslationSolution {
  std::vector<TranslationCandidate> candidates;
  double value = 0.0;
  bool certified = false;
  long nodes_explored = 0;
};

// Dimension-reduced BnB over the two smaller scene-box axes with the largest
// axis stabbed exactly. The axis permutation is internal; candidates come
// back in world coordinates.
TranslationSolution solve_translation(
    std::span<const TransAssociation> associations, const SaturationSpec& spec,
    const TranslationConfig& config, const Eigen::AlignedBox3d& scene_box);

// Physical-constraint pruning: keeps an inlier only if an endpoint has
// positive depth under (r, t) and the depth-clipped projected segment meets
// the image rectangle.
std::vector<int> prune_inliers(const Eigen::Vector3d& t,
                               const Eigen::Matrix3d& r,
                               std::span<const TransAssociation> associations,
                               std::span<const int> inliers,
                               const Intrinsics& intr);

struct RefineResult {
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  bool full_rank = false;
  double squared_residual = 0.0;
};

// Least-squares translation over the pruned inliers via the 3x3 normal
// equations; falls back to the input when fewer than 3 inliers or the normals
// do not span rank 3.
RefineResult refine_translation(std::span<const TransAssociation> associations,
                                std::span<const int> inliers,
                                const Eigen::Vector3d& fallback);

}  // namespace satcm
