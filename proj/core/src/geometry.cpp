#include "satcm/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace satcm {

namespace {
constexpr double kDegenerateNorm = 1e-12;
}

Line3D Line3D::from_endpoints(const Eigen::Vector3d& a,
                              const Eigen::Vector3d& b, int label) {
  const Eigen::Vector3d d = b - a;
  const double len = d.norm();
  if (len < kDegenerateNorm) {
    throw std::invalid_argument("Line3D::from_endpoints: coincident endpoints");
  }
  Line3D out;
  out.point = 0.5 * (a + b);
  out.direction = d / len;
  out.label = label;
  out.endpoints = {a, b};
  return out;
}

Eigen::Vector3d AxisAngle::axis() const {
  return polar_to_xyz(alpha, phi);
}

AxisAngle AxisAngle::from_axis(const Eigen::Vector3d& axis, double theta) {
  Eigen::Vector3d u = axis.normalized();
  double t = theta;
  // Amplitudes outside [0, pi] are folded back by flipping the axis.
  t = std::remainder(t, 2.0 * M_PI);
  if (t < 0.0) {
    t = -t;
    u = -u;
  }
  auto [alpha, phi] = xyz_to_polar(u);
  return AxisAngle{alpha, phi, t};
}

AxisAngle AxisAngle::from_matrix(const Eigen::Matrix3d& r) {
  const Eigen::AngleAxisd aa(r);
  return from_axis(aa.axis(), aa.angle());
}

Eigen::Vector3d polar_to_xyz(double alpha, double phi) {
  const double sa = std::sin(alpha);
  return {sa * std::cos(phi), sa * std::sin(phi), std::cos(alpha)};
}

std::pair<double, double> xyz_to_polar(const Eigen::Vector3d& u) {
  const double alpha = std::acos(std::clamp(u.z() / u.norm(), -1.0, 1.0));
  double phi = std::atan2(u.y(), u.x());
  if (phi < 0.0) phi += 2.0 * M_PI;
  return {alpha, phi};
}

double wrap_2pi(double angle) {
  double a = std::fmod(angle, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a;
}

Eigen::Vector3d canonical_sign(const Eigen::Vector3d& v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > kDegenerateNorm) {
      return v[i] > 0.0 ? v : Eigen::Vector3d(-v);
    }
  }
  return v;
}

std::optional<Line2D> normalize_pixel_line(const PixelLine& line,
                                           const Intrinsics& intr) {
  const Eigen::RowVector3d coeffs_c =
      line.coeffs.transpose() * intr.k;  // (A,B,C) K
  const double norm = coeffs_c.norm();
  // A zero gradient (A_c, B_c) leaves no image line to normalize.
  if (norm < kDegenerateNorm || coeffs_c.head<2>().norm() < kDegenerateNorm) {
    return std::nullopt;
  }
  Line2D out;
  out.normal = canonical_sign(coeffs_c.transpose() / norm);
  out.label = line.label;
  out.endpoints_px = line.endpoints;
  return out;
}

Eigen::Matrix3d rotation_matrix(const AxisAngle& a) {
  const Eigen::Vector3d u = a.axis();
  Eigen::Matrix3d ux;
  ux << 0, -u.z(), u.y(), u.z(), 0, -u.x(), -u.y(), u.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(a.theta) * ux +
         (1.0 - std::cos(a.theta)) * ux * ux;
}

Eigen::Vector3d rotate(const AxisAngle& a, const Eigen::Vector3d& x) {
  const Eigen::Vector3d u = a.axis();
  const double st = std::sin(a.theta);
  const double ct = std::cos(a.theta);
  return x + st * u.cross(x) + (1.0 - ct) * u.cross(u.cross(x));
}

double rotation_residual(const Eigen::Matrix3d& r, const Eigen::Vector3d& n_c,
                         const Eigen::Vector3d& v) {
  return std::abs((r * n_c).dot(v));
}

double translation_residual(const Eigen::Vector3d& n_w,
                            const Eigen::Vector3d& p,
                            const Eigen::Vector3d& t) {
  return std::abs(n_w.dot(p - t));
}

double rotation_error_deg(const Eigen::Matrix3d& r1,
                          const Eigen::Matrix3d& r2) {
  const double c = std::clamp(((r1.transpose() * r2).trace() - 1.0) / 2.0,
                              -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

std::optional<Eigen::Vector3d> project_line_normal(const Line3D& line,
                                                   const Pose& pose) {
  // Plane through the camera center and the line, in camera coordinates.
  const Eigen::Matrix3d rt = pose.rotation.transpose();
  const Eigen::Vector3d p_c = rt * (line.point - pose.translation);
  const Eigen::Vector3d v_c = rt * line.direction;
  const Eigen::Vector3d n = p_c.cross(v_c);
  const double norm = n.norm();
  if (norm < kDegenerateNorm) {
    return std::nullopt;  // line passes through the camera center
  }
  return canonical_sign(n / norm);
}

std::optional<Eigen::Vector2d> project_point_px(const Pose& pose,
                                                const Intrinsics& intr,
                                                const Eigen::Vector3d& p_world) {
  const Eigen::Vector3d p_c =
      pose.rotation.transpose() * (p_world - pose.translation);
  if (p_c.z() < kDegenerateNorm) {
    return std::nullopt;
  }
  const Eigen::Vector3d px = intr.k * p_c;
  return Eigen::Vector2d(px.x() / px.z(), px.y() / px.z());
}

}  // namespace satcm
