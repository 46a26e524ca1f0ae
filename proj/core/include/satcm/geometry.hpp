#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <utility>

namespace satcm {

// 2D line in pixel coordinates: coeffs (A,B,C) with [A B C](u,v,1) = 0.
struct PixelLine {
  Eigen::Vector3d coeffs = Eigen::Vector3d::Zero();
  std::array<Eigen::Vector2d, 2> endpoints = {Eigen::Vector2d::Zero(),
                                              Eigen::Vector2d::Zero()};
  int label = -1;
};

// 2D line in the normalized camera frame, parameterized by the unit
// coefficient (normal) vector. Pixel endpoints are carried along for the
// image-intersection pruning stage.
struct Line2D {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitX();
  int label = -1;
  std::array<Eigen::Vector2d, 2> endpoints_px = {Eigen::Vector2d::Zero(),
                                                 Eigen::Vector2d::Zero()};
};

// 3D line in the world frame: anchor point plus unit direction, with the
// segment endpoints retained.
struct Line3D {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
  int label = -1;
  std::array<Eigen::Vector3d, 2> endpoints = {Eigen::Vector3d::Zero(),
                                              Eigen::Vector3d::Zero()};

  static Line3D from_endpoints(const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b, int label);
};

// Rotation as polar axis (alpha, phi) plus amplitude theta in [0, pi].
// Axis u = (sin a cos p, sin a sin p, cos a).
struct AxisAngle {
  double alpha = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, 2pi]
  double theta = 0.0;  // [0, pi]

  Eigen::Vector3d axis() const;
  static AxisAngle from_axis(const Eigen::Vector3d& axis, double theta);
  static AxisAngle from_matrix(const Eigen::Matrix3d& r);
};

// Camera-to-world transform: x_w = R x_c + t.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

struct Intrinsics {
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  int width = 0;
  int height = 0;
};

// Polar parameterization of the unit sphere used everywhere by the solvers.
Eigen::Vector3d polar_to_xyz(double alpha, double phi);
std::pair<double, double> xyz_to_polar(const Eigen::Vector3d& u);

// Wraps an angle into [0, 2pi).
double wrap_2pi(double angle);

// Converts a pixel-space line to the normalized camera frame via
// (A_c,B_c,C_c) = (A,B,C) K, then unit-normalizes with the sign fixed so the
// first nonzero component is positive. Returns nullopt for degenerate input.
std::optional<Line2D> normalize_pixel_line(const PixelLine& line,
                                           const Intrinsics& intr);

// Rodrigues rotation R = I + sin(t)[u]x + (1-cos(t))[u]x^2.
Eigen::Matrix3d rotation_matrix(const AxisAngle& a);
Eigen::Vector3d rotate(const AxisAngle& a, const Eigen::Vector3d& x);

// |(R n_c) . v|, the rotation-only projection residual.
double rotation_residual(const Eigen::Matrix3d& r, const Eigen::Vector3d& n_c,
                         const Eigen::Vector3d& v);

// |n_w . (p - t)| in meters.
double translation_residual(const Eigen::Vector3d& n_w,
                            const Eigen::Vector3d& p,
                            const Eigen::Vector3d& t);

// Geodesic angle between two rotations, in degrees.
double rotation_error_deg(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2);

// Normal vector of the exact projection of a 3D line under a pose: the unit
// normal of the plane spanned by the camera center and the line, expressed in
// the camera frame with the first-nonzero-positive sign convention.
std::optional<Eigen::Vector3d> project_line_normal(const Line3D& line,
                                                   const Pose& pose);

// Projects a world point to pixel coordinates; nullopt when at or behind the
// camera plane.
std::optional<Eigen::Vector2d> project_point_px(const Pose& pose,
                                                const Intrinsics& intr,
                                                const Eigen::Vector3d& p_world);

// Fixes the sign of a vector so its first component larger than tol in
// magnitude is positive.
Eigen::Vector3d canonical_sign(const Eigen::Vector3d& v);

}  // namespace satcm
