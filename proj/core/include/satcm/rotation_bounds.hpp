#pragma once

#include <Eigen/Dense>
#include <array>

#include "satcm/interval_set.hpp"

namespace satcm {

// Unit direction with cached polar coordinates.
struct PolarDir {
  double alpha = 0.0;
  double phi = 0.0;
  double sin_alpha = 0.0;
  double cos_alpha = 1.0;

  PolarDir() = default;
  explicit PolarDir(const Eigen::Vector3d& u);
};

// One candidate 2D-3D line pairing with the geometry the rotation solver
// needs, cached at construction.
struct Association {
  int query_index = 0;
  int map_index = 0;
  Eigen::Vector3d n_c = Eigen::Vector3d::UnitX();  // image-line normal
  Eigen::Vector3d v = Eigen::Vector3d::UnitY();    // map-line direction
  double dot = 0.0;                                // n . v
  Eigen::Vector3d cross = Eigen::Vector3d::Zero();  // v x n (unnormalized)
  double cross_norm = 0.0;
  Eigen::Vector3d c_a = Eigen::Vector3d::Zero();   // (v x n) normalized
  Eigen::Vector3d m_a = Eigen::Vector3d::Zero();   // (v + n) normalized
  Eigen::Vector3d m_a_perp = Eigen::Vector3d::Zero();  // (v - n) normalized
  double sum_norm = 0.0;   // |v + n|
  double diff_norm = 0.0;  // |v - n|
  PolarDir c_polar, m_polar, mp_polar, n_polar;

  Association() = default;
  Association(int query, int map, const Eigen::Vector3d& normal,
              const Eigen::Vector3d& direction);
};

// Axis sub-cube in polar coordinates.
struct AxisCube {
  double alpha_lo = 0.0;
  double alpha_hi = M_PI;
  double phi_lo = 0.0;
  double phi_hi = M_PI;

  double width() const;
  double alpha_mid() const { return 0.5 * (alpha_lo + alpha_hi); }
  double phi_mid() const { return 0.5 * (phi_lo + phi_hi); }
  Eigen::Vector3d center() const;
  bool contains(const Eigen::Vector3d& u, double tol = 1e-9) const;
  bool contains(double alpha, double phi, double tol = 1e-9) const;
  std::array<AxisCube, 4> split() const;
};

// h1(u|a) = u . (v x n); h2(u|a) = n^T [u]x^2 v = (u.n)(u.v) - n.v.
double h1(const Eigen::Vector3d& u, const Association& a);
double h2(const Eigen::Vector3d& u, const Association& a);

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

// Exact range of u . w for unit w over an axis cube. The phi coordinate of
// the extremum is the nearest (resp. farthest) point of the cube's phi arc to
// w's azimuth; the alpha coordinate is resolved in closed form from the
// resulting sinusoid in alpha.
Bounds dot_range(const AxisCube& cube, const Eigen::Vector3d& w_unit);
Bounds dot_range(const AxisCube& cube, const PolarDir& w);

// Exact min/max of h1 and h2 over a cube. h2 uses the eigen structure of
// M_a = (n v^T + v n^T)/2 for interior extremes and closed-form arc analysis
// on the boundary; near-parallel (n, v) pairs fall back to an interval bound
// on (u.n)(u.v) that is sound and tight to within |v -+ n|.
Bounds h1_bounds(const AxisCube& cube, const Association& a);
Bounds h2_bounds(const AxisCube& cube, const Association& a);

// Solves { theta in [0, pi] :
//            A + h1_lo sin(theta) + h2_lo (1 - cos(theta)) <= eps
//        and A + h1_hi sin(theta) + h2_hi (1 - cos(theta)) >= -eps }
// in closed form, writing each side as (A + C) + R sin(theta + psi).
// With h1_lo == h1_hi and h2_lo == h2_hi this is the exact inlier set
// { theta : |f(theta)| <= eps } of one association at a fixed axis.
// The array overload writes at most 4 disjoint sorted intervals and returns
// their count without allocating.
int theta_intervals(double a_dot, double h1_lo, double h1_hi, double h2_lo,
                    double h2_hi, double eps, std::array<Interval, 4>& out);
IntervalSet theta_intervals(double a_dot, double h1_lo, double h1_hi,
                            double h2_lo, double h2_hi, double eps);

// Exact inlier intervals of one association at a fixed axis.
int exact_theta_intervals(const Eigen::Vector3d& u, const Association& a,
                          double eps, std::array<Interval, 4>& out);

// Signed rotation residual f(theta, u | a) = n.v + h1 sin + h2 (1 - cos);
// equals n^T R(u, theta) v with R the Rodrigues rotation.
double rotation_residual_expanded(double theta, const Eigen::Vector3d& u,
                                  const Association& a);

}  // namespace satcm
