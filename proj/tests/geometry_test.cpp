#include <doctest.h>

#include <random>

#include "satcm/geometry.hpp"
#include "support/oracles.hpp"

using namespace satcm;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("normalize_pixel_line basics") {
  Intrinsics eye;  // K = I
  eye.width = 640;
  eye.height = 480;

  PixelLine degenerate;
  degenerate.coeffs = {0, 0, 5};
  CHECK_FALSE(normalize_pixel_line(degenerate, eye).has_value());

  PixelLine vertical;
  vertical.coeffs = {1, 0, 0};
  vertical.label = 7;
  const auto line = normalize_pixel_line(vertical, eye);
  REQUIRE(line.has_value());
  CHECK(line->normal.isApprox(Eigen::Vector3d(1, 0, 0)));
  CHECK(line->label == 7);
}

TEST_CASE("normalize_pixel_line matches symbolic product") {
  Intrinsics intr;
  intr.k << 600, 0, 320, 0, 600, 240, 0, 0, 1;
  PixelLine pl;
  pl.coeffs = {1, 0, -320};
  const auto line = normalize_pixel_line(pl, intr);
  REQUIRE(line.has_value());
  // (1, 0, -320) K = (600, 0, 320 - 320) = (600, 0, 0), normalized (1, 0, 0).
  CHECK(line->normal.isApprox(Eigen::Vector3d(1, 0, 0), 1e-12));
}

TEST_CASE("normalize_pixel_line is scale invariant with fixed sign") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Intrinsics intr;
  intr.k << 500, 0, 310, 0, 520, 250, 0, 0, 1;
  for (int trial = 0; trial < 200; ++trial) {
    PixelLine pl;
    pl.coeffs = {uni(rng), uni(rng), 100.0 * uni(rng)};
    if (pl.coeffs.head<2>().norm() < 1e-3) continue;
    const auto base = normalize_pixel_line(pl, intr);
    REQUIRE(base.has_value());
    const double lambda = uni(rng) * 10.0;
    if (std::abs(lambda) < 1e-6) continue;
    PixelLine scaled = pl;
    scaled.coeffs *= lambda;
    const auto other = normalize_pixel_line(scaled, intr);
    REQUIRE(other.has_value());
    CHECK((base->normal - other->normal).norm() < 1e-12);
  }
}

TEST_CASE("rotate: identity, quarter turn, quaternion oracle") {
  const AxisAngle id{0.3, 1.1, 0.0};
  CHECK(rotate(id, {1, 2, 3}).isApprox(Eigen::Vector3d(1, 2, 3), 1e-15));

  const AxisAngle quarter = AxisAngle::from_axis({0, 0, 1}, M_PI / 2);
  CHECK(rotate(quarter, {1, 0, 0}).isApprox(Eigen::Vector3d(0, 1, 0), 1e-12));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uth(0.0, M_PI);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Vector3d u = oracles::random_unit(rng);
    const double theta = uth(rng);
    const Eigen::Vector3d x = 3.0 * oracles::random_unit(rng);
    const AxisAngle a = AxisAngle::from_axis(u, theta);
    const Eigen::Vector3d got = rotate(a, x);
    CHECK((got - oracles::quat_rotate(u, theta, x)).norm() < 1e-12);
    CHECK(std::abs(got.norm() - x.norm()) < 1e-12);  // isometry
    CHECK((rotation_matrix(a) * x - got).norm() < 1e-12);
  }
}

TEST_CASE("rotation_residual basics and sign invariance") {
  const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();
  CHECK(rotation_residual(eye, {1, 0, 0}, {0, 1, 0}) == doctest::Approx(0.0));
  CHECK(rotation_residual(eye, {1, 0, 0}, {1, 0, 0}) == doctest::Approx(1.0));
  const Eigen::Matrix3d r90 =
      rotation_matrix(AxisAngle::from_axis({0, 0, 1}, M_PI / 2));
  CHECK(rotation_residual(r90, {1, 0, 0}, {0, 1, 0}) == doctest::Approx(1.0));

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Matrix3d r = oracles::random_rotation(rng);
    const Eigen::Vector3d n = oracles::random_unit(rng);
    const Eigen::Vector3d v = oracles::random_unit(rng);
    const double base = rotation_residual(r, n, v);
    CHECK(rotation_residual(r, -n, v) == doctest::Approx(base));
    CHECK(rotation_residual(r, n, -v) == doctest::Approx(base));
  }
}

TEST_CASE("translation_residual") {
  CHECK(translation_residual({0, 1, 0}, {1, 2, 3}, {1, 2, 3}) ==
        doctest::Approx(0.0));
  CHECK(translation_residual({1, 0, 0}, {2, 0, 0}, {0, 0, 0}) ==
        doctest::Approx(2.0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector3d n = oracles::random_unit(rng);
    const Eigen::Vector3d p(uni(rng), uni(rng), uni(rng));
    const Eigen::Vector3d t(uni(rng), uni(rng), uni(rng));
    const double expect = std::abs(n.x() * (p.x() - t.x()) +
                                   n.y() * (p.y() - t.y()) +
                                   n.z() * (p.z() - t.z()));
    CHECK(translation_residual(n, p, t) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("rotation_error_deg against quaternion oracle") {
  std::mt19937_64 rng(8);
  const Eigen::Matrix3d r = oracles::random_rotation(rng);
  CHECK(rotation_error_deg(r, r) < 1e-5);
  const Eigen::Matrix3d r10 =
      r * rotation_matrix(AxisAngle::from_axis(oracles::random_unit(rng),
                                               10.0 * M_PI / 180.0));
  CHECK(rotation_error_deg(r, r10) == doctest::Approx(10.0).epsilon(1e-9));
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Matrix3d a = oracles::random_rotation(rng);
    const Eigen::Matrix3d b = oracles::random_rotation(rng);
    CHECK(rotation_error_deg(a, b) ==
          doctest::Approx(oracles::quat_angle_deg(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("projection consistency of exact synthetic lines") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    Pose pose;
    pose.rotation = oracles::random_rotation(rng);
    pose.translation = {uni(rng), uni(rng), uni(rng)};
    // A line placed in front of the camera.
    const Eigen::Vector3d p_cam(uni(rng), uni(rng), 3.0 + std::abs(uni(rng)));
    const Eigen::Vector3d a = pose.rotation * p_cam + pose.translation;
    const Eigen::Vector3d b = a + 1.5 * oracles::random_unit(rng);
    Line3D line;
    try {
      line = Line3D::from_endpoints(a, b, 0);
    } catch (const std::invalid_argument&) {
      continue;
    }
    const auto n = project_line_normal(line, pose);
    if (!n.has_value()) continue;
    CHECK(rotation_residual(pose.rotation, *n, line.direction) < 1e-10);
    CHECK(translation_residual(pose.rotation * *n, line.point,
                               pose.translation) < 1e-10);
  }
}

TEST_CASE("AxisAngle round trip and amplitude folding") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> uth(0.0, M_PI);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector3d u = oracles::random_unit(rng);
    const double theta = uth(rng);
    const AxisAngle a = AxisAngle::from_axis(u, theta);
    CHECK(a.theta == doctest::Approx(theta));
    CHECK((a.axis() - u).norm() < 1e-12);
    // theta > pi folds onto the opposite axis
    const AxisAngle folded = AxisAngle::from_axis(u, 2.0 * M_PI - theta);
    CHECK(folded.theta == doctest::Approx(theta).epsilon(1e-12));
    CHECK((folded.axis() + u).norm() < 1e-9);
    const AxisAngle back = AxisAngle::from_matrix(rotation_matrix(a));
    CHECK(rotation_error_deg(rotation_matrix(back), rotation_matrix(a)) < 1e-5);
  }
}

TEST_SUITE_END();
