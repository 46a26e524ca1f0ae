#include "satcm/rotation_bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "satcm/geometry.hpp"

namespace satcm {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kGuard = 1e-12;

double circ_dist(double a, double b) {
  return std::abs(std::remainder(a - b, kTwoPi));
}

bool arc_contains(double lo, double hi, double x) {
  const double rel = wrap_2pi(x - lo);
  return rel <= (hi - lo) + 1e-12 || rel >= kTwoPi - 1e-12;
}

// Extreme of A sin(x) + B cos(x) over [lo, hi].
double sinusoid_extreme(double a, double b, double lo, double hi,
                        bool want_max) {
  double best = want_max ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  auto eval = [&](double x) {
    const double f = a * std::sin(x) + b * std::cos(x);
    best = want_max ? std::max(best, f) : std::min(best, f);
  };
  eval(lo);
  eval(hi);
  const double base = std::atan2(a, b);  // f'(x) = 0 at x = base + k pi
  for (int k = -2; k <= 2; ++k) {
    const double x = base + k * M_PI;
    if (x > lo && x < hi) eval(x);
  }
  return best;
}

// ---- closed-form real root finders (Newton-polished) --------------------

double eval_poly(const double* c, int deg, double x) {
  double y = c[deg];
  for (int i = deg - 1; i >= 0; --i) y = y * x + c[i];
  return y;
}

void polish_root(const double* c, int deg, double& x) {
  for (int it = 0; it < 2; ++it) {
    const double f = eval_poly(c, deg, x);
    double df = deg * c[deg];
    for (int i = deg - 1; i >= 1; --i) df = df * x + i * c[i];
    if (std::abs(df) < 1e-300) return;
    const double step = f / df;
    if (!std::isfinite(step)) return;
    x -= step;
  }
}

int quadratic_roots(double a, double b, double c, double out[2]) {
  // a x^2 + b x + c
  if (std::abs(a) < 1e-300) {
    if (std::abs(b) < 1e-300) return 0;
    out[0] = -c / b;
    return 1;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return 0;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  out[0] = q / a;
  int n = 1;
  if (q != 0.0) out[n++] = c / q;
  return n;
}

// Monic cubic x^3 + a x^2 + b x + c, all real roots.
int cubic_roots(double a, double b, double c, double out[3]) {
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double shift = -a / 3.0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  int n = 0;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    const double u = std::cbrt(-q / 2.0 + s);
    const double v = std::cbrt(-q / 2.0 - s);
    out[n++] = u + v + shift;
  } else if (p == 0.0 && q == 0.0) {
    out[n++] = shift;
  } else {
    const double rho = std::sqrt(-p * p * p / 27.0);
    const double theta = std::acos(std::clamp(-q / (2.0 * rho), -1.0, 1.0));
    const double mag = 2.0 * std::sqrt(-p / 3.0);
    for (int k = 0; k < 3; ++k) {
      out[n++] = mag * std::cos((theta + 2.0 * M_PI * k) / 3.0) + shift;
    }
  }
  const double coeffs[4] = {c, b, a, 1.0};
  for (int i = 0; i < n; ++i) polish_root(coeffs, 3, out[i]);
  return n;
}

// Real roots of c[0] + c[1] t + ... + c[4] t^4 by Ferrari's method.
int real_roots(const std::array<double, 5>& c, double out[4]) {
  double scale = 0.0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0;
  int deg = 4;
  while (deg > 0 && std::abs(c[deg]) <= 1e-13 * scale) --deg;
  if (deg == 0) return 0;
  if (deg == 1) {
    out[0] = -c[0] / c[1];
    return 1;
  }
  if (deg == 2) return quadratic_roots(c[2], c[1], c[0], out);
  if (deg == 3) {
    const int n = cubic_roots(c[2] / c[3], c[1] / c[3], c[0] / c[3], out);
    const double coeffs[4] = {c[0], c[1], c[2], c[3]};
    for (int i = 0; i < n; ++i) polish_root(coeffs, 3, out[i]);
    return n;
  }

  const double a = c[3] / c[4];
  const double b = c[2] / c[4];
  const double cc = c[1] / c[4];
  const double d = c[0] / c[4];
  // Depressed quartic y^4 + p y^2 + q y + r with x = y - a/4.
  const double p = b - 3.0 * a * a / 8.0;
  const double q = cc - a * b / 2.0 + a * a * a / 8.0;
  const double r =
      d - a * cc / 4.0 + a * a * b / 16.0 - 3.0 * a * a * a * a / 256.0;
  int n = 0;
  if (std::abs(q) < 1e-12 * std::max({1.0, std::abs(p), std::abs(r)})) {
    // Biquadratic.
    double z[2];
    const int nz = quadratic_roots(1.0, p, r, z);
    for (int i = 0; i < nz; ++i) {
      if (z[i] < 0.0) continue;
      const double s = std::sqrt(z[i]);
      out[n++] = s - a / 4.0;
      out[n++] = -s - a / 4.0;
    }
  } else {
    // Resolvent cubic z^3 + 2p z^2 + (p^2 - 4r) z - q^2 = 0 has a positive
    // root; factor into two quadratics with w = sqrt(z0).
    double z[3];
    const int nz = cubic_roots(2.0 * p, p * p - 4.0 * r, -q * q, z);
    double z0 = -1.0;
    for (int i = 0; i < nz; ++i) z0 = std::max(z0, z[i]);
    if (z0 <= 0.0) return 0;
    const double w = std::sqrt(z0);
    const double base = 0.5 * (p + z0);
    const double offset = 0.5 * q / w;
    double roots2[2];
    int n2 = quadratic_roots(1.0, w, base - offset, roots2);
    for (int i = 0; i < n2; ++i) out[n++] = roots2[i] - a / 4.0;
    n2 = quadratic_roots(1.0, -w, base + offset, roots2);
    for (int i = 0; i < n2; ++i) out[n++] = roots2[i] - a / 4.0;
  }
  const double coeffs[5] = {c[0], c[1], c[2], c[3], c[4]};
  for (int i = 0; i < n; ++i) polish_root(coeffs, 4, out[i]);
  return n;
}

// ---- exact arc extremes of the h2 quadratic form -------------------------
// For any x: x^T M x = (x.n)(x.v) and x^T M y = ((x.n)(y.v) + (x.v)(y.n))/2.

// Along the meridian (fixed phi): a0 + b cos(2 alpha) + c sin(2 alpha).
void meridian_extremes(const Eigen::Vector3d& n, const Eigen::Vector3d& v,
                       double cos_phi, double sin_phi, double alpha_lo,
                       double alpha_hi, double& qmin, double& qmax) {
  const double en = cos_phi * n.x() + sin_phi * n.y();
  const double ev = cos_phi * v.x() + sin_phi * v.y();
  const double mee = en * ev;
  const double mzz = n.z() * v.z();
  const double mez = 0.5 * (en * v.z() + ev * n.z());
  const double a0 = 0.5 * (mee + mzz);
  const double b = 0.5 * (mzz - mee);
  const double c = mez;
  auto eval = [&](double alpha) {
    const double q = a0 + b * std::cos(2.0 * alpha) + c * std::sin(2.0 * alpha);
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
  };
  eval(alpha_lo);
  eval(alpha_hi);
  const double base = 0.5 * std::atan2(c, b);
  for (int k = -1; k <= 4; ++k) {
    const double alpha = base + 0.5 * k * M_PI;
    if (alpha > alpha_lo && alpha < alpha_hi) eval(alpha);
  }
}

// Along the parallel (fixed alpha): A + B cos 2phi + C sin 2phi + D cos phi
// + E sin phi. Stationary points via the tan(phi/2) quartic; phi = pi (the
// substitution's point at infinity) is checked directly.
void parallel_extremes(const Eigen::Vector3d& n, const Eigen::Vector3d& v,
                       double sin_alpha, double cos_alpha, double phi_lo,
                       double phi_hi, double& qmin, double& qmax) {
  const double s2 = sin_alpha * sin_alpha;
  const double sc = sin_alpha * cos_alpha;
  const double m00 = n.x() * v.x();
  const double m11 = n.y() * v.y();
  const double m22 = n.z() * v.z();
  const double m01 = 0.5 * (n.x() * v.y() + n.y() * v.x());
  const double m02 = 0.5 * (n.x() * v.z() + n.z() * v.x());
  const double m12 = 0.5 * (n.y() * v.z() + n.z() * v.y());
  const double fa = s2 * 0.5 * (m00 + m11) + cos_alpha * cos_alpha * m22;
  const double fb = s2 * 0.5 * (m00 - m11);
  const double fc = s2 * m01;
  const double fd = 2.0 * sc * m02;
  const double fe = 2.0 * sc * m12;
  auto eval = [&](double phi) {
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    const double q = fa + fb * (2.0 * cp * cp - 1.0) + fc * (2.0 * sp * cp) +
                     fd * cp + fe * sp;
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
  };
  eval(phi_lo);
  eval(phi_hi);
  for (double cand : {M_PI, 3.0 * M_PI}) {
    if (cand > phi_lo && cand < phi_hi) eval(cand);
  }
  // -2B sin2p + 2C cos2p - D sinp + E cosp = 0, t = tan(p/2).
  const std::array<double, 5> poly = {2.0 * fc + fe, -8.0 * fb - 2.0 * fd,
                                      -12.0 * fc, 8.0 * fb - 2.0 * fd,
                                      2.0 * fc - fe};
  double roots[4];
  const int nr = real_roots(poly, roots);
  for (int i = 0; i < nr; ++i) {
    const double p = 2.0 * std::atan(roots[i]);  // (-pi, pi)
    for (double cand : {p, p + kTwoPi}) {
      if (cand > phi_lo && cand < phi_hi) eval(cand);
    }
  }
}

}  // namespace

PolarDir::PolarDir(const Eigen::Vector3d& u) {
  const auto [a, p] = xyz_to_polar(u);
  alpha = a;
  phi = p;
  sin_alpha = std::sin(a);
  cos_alpha = std::cos(a);
}

Association::Association(int query, int map, const Eigen::Vector3d& normal,
                         const Eigen::Vector3d& direction)
    : query_index(query),
      map_index(map),
      n_c(normal),
      v(direction),
      dot(normal.dot(direction)),
      cross(direction.cross(normal)),
      cross_norm(cross.norm()),
      sum_norm((direction + normal).norm()),
      diff_norm((direction - normal).norm()) {
  if (cross_norm > 0.0) {
    c_a = cross / cross_norm;
    c_polar = PolarDir(c_a);
  }
  if (sum_norm > 0.0) {
    m_a = (direction + normal) / sum_norm;
    m_polar = PolarDir(m_a);
  }
  if (diff_norm > 0.0) {
    m_a_perp = (direction - normal) / diff_norm;
    mp_polar = PolarDir(m_a_perp);
  }
  n_polar = PolarDir(normal);
}

double AxisCube::width() const {
  return std::max(alpha_hi - alpha_lo, phi_hi - phi_lo);
}

Eigen::Vector3d AxisCube::center() const {
  return polar_to_xyz(alpha_mid(), phi_mid());
}

bool AxisCube::contains(double alpha, double phi, double tol) const {
  if (alpha < alpha_lo - tol || alpha > alpha_hi + tol) return false;
  if (std::sin(alpha) < 1e-12) return true;  // pole: phi unconstrained
  const double rel = wrap_2pi(phi - phi_lo);
  return rel <= (phi_hi - phi_lo) + tol || rel >= kTwoPi - tol;
}

bool AxisCube::contains(const Eigen::Vector3d& u, double tol) const {
  const auto [alpha, phi] = xyz_to_polar(u);
  return contains(alpha, phi, tol);
}

std::array<AxisCube, 4> AxisCube::split() const {
  const double am = alpha_mid();
  const double pm = phi_mid();
  return {AxisCube{alpha_lo, am, phi_lo, pm}, AxisCube{alpha_lo, am, pm, phi_hi},
          AxisCube{am, alpha_hi, phi_lo, pm}, AxisCube{am, alpha_hi, pm, phi_hi}};
}

double h1(const Eigen::Vector3d& u, const Association& a) {
  return u.dot(a.cross);
}

double h2(const Eigen::Vector3d& u, const Association& a) {
  return u.dot(a.n_c) * u.dot(a.v) - a.dot;
}

Bounds dot_range(const AxisCube& cube, const PolarDir& w) {
  double d_near = 0.0;
  if (!arc_contains(cube.phi_lo, cube.phi_hi, w.phi)) {
    d_near =
        std::min(circ_dist(w.phi, cube.phi_lo), circ_dist(w.phi, cube.phi_hi));
  }
  double d_far = M_PI;
  if (!arc_contains(cube.phi_lo, cube.phi_hi, w.phi + M_PI)) {
    d_far =
        std::max(circ_dist(w.phi, cube.phi_lo), circ_dist(w.phi, cube.phi_hi));
  }

  // For fixed alpha the sin(alpha) coefficient is nonnegative, so the
  // azimuth of the maximizer (minimizer) is the nearest (farthest) point of
  // the phi arc; the alpha coordinate then solves a single sinusoid.
  Bounds b;
  b.hi = sinusoid_extreme(w.sin_alpha * std::cos(d_near), w.cos_alpha,
                          cube.alpha_lo, cube.alpha_hi, true);
  b.lo = sinusoid_extreme(w.sin_alpha * std::cos(d_far), w.cos_alpha,
                          cube.alpha_lo, cube.alpha_hi, false);
  return b;
}

Bounds dot_range(const AxisCube& cube, const Eigen::Vector3d& w_unit) {
  return dot_range(cube, PolarDir(w_unit));
}

Bounds h1_bounds(const AxisCube& cube, const Association& a) {
  if (a.cross_norm < 1e-15) {
    return {-a.cross_norm, a.cross_norm};
  }
  const Bounds r = dot_range(cube, a.c_polar);
  return {a.cross_norm * r.lo - kGuard, a.cross_norm * r.hi + kGuard};
}

Bounds h2_bounds(const AxisCube& cube, const Association& a) {
  constexpr double kParallelTol = 1e-4;
  const double d = a.dot;

  if (a.sum_norm < kParallelTol || a.diff_norm < kParallelTol) {
    // v ~ +-n: (u.n)(u.v) = sgn g^2 + g (u.r) with g = u.n, |r| = eta.
    const double sgn = d >= 0.0 ? 1.0 : -1.0;
    const double eta = std::min(a.sum_norm, a.diff_norm);
    const Bounds g = dot_range(cube, a.n_polar);
    const double sq_lo = (g.lo <= 0.0 && 0.0 <= g.hi)
                             ? 0.0
                             : std::min(g.lo * g.lo, g.hi * g.hi);
    const double sq_hi = std::max(g.lo * g.lo, g.hi * g.hi);
    const double p_lo = sgn > 0.0 ? sq_lo : -sq_hi;
    const double p_hi = sgn > 0.0 ? sq_hi : -sq_lo;
    return {p_lo - eta - d - kGuard, p_hi + eta - d + kGuard};
  }

  double qmin = std::numeric_limits<double>::infinity();
  double qmax = -std::numeric_limits<double>::infinity();
  meridian_extremes(a.n_c, a.v, std::cos(cube.phi_lo), std::sin(cube.phi_lo),
                    cube.alpha_lo, cube.alpha_hi, qmin, qmax);
  meridian_extremes(a.n_c, a.v, std::cos(cube.phi_hi), std::sin(cube.phi_hi),
                    cube.alpha_lo, cube.alpha_hi, qmin, qmax);
  parallel_extremes(a.n_c, a.v, std::sin(cube.alpha_lo),
                    std::cos(cube.alpha_lo), cube.phi_lo, cube.phi_hi, qmin,
                    qmax);
  parallel_extremes(a.n_c, a.v, std::sin(cube.alpha_hi),
                    std::cos(cube.alpha_hi), cube.phi_lo, cube.phi_hi, qmin,
                    qmax);

  // Interior extremes exist only at the eigenvectors of M: the maximum at
  // +-m_a, the minimum at +-m_a_perp (the c_a pair is a saddle).
  if (cube.contains(a.m_polar.alpha, a.m_polar.phi) ||
      cube.contains(M_PI - a.m_polar.alpha, a.m_polar.phi + M_PI)) {
    qmax = std::max(qmax, 0.5 * (1.0 + d));
  }
  if (cube.contains(a.mp_polar.alpha, a.mp_polar.phi) ||
      cube.contains(M_PI - a.mp_polar.alpha, a.mp_polar.phi + M_PI)) {
    qmin = std::min(qmin, -0.5 * (1.0 - d));
  }
  return {qmin - d - kGuard, qmax - d + kGuard};
}

namespace {

// Appends { theta in [0, pi] : sin(theta + psi) <= s } (or >= s) to out;
// at most 2 segments inside the length-pi window.
int sin_bands(double psi, double s, bool leq, Interval* out) {
  if (leq ? s >= 1.0 : s <= -1.0) {
    out[0] = {0.0, M_PI};
    return 1;
  }
  if (leq ? s < -1.0 : s > 1.0) return 0;
  const double a = std::asin(s);
  int n = 0;
  for (int k = -2; k <= 2; ++k) {
    // sin <= s on [pi - a, 2 pi + a]; sin >= s on [a, pi - a] (mod 2 pi)
    const double lo =
        std::max(0.0, (leq ? M_PI - a : a) + k * kTwoPi - psi);
    const double hi =
        std::min(M_PI, (leq ? kTwoPi + a : M_PI - a) + k * kTwoPi - psi);
    if (lo <= hi && n < 2) {
      if (n > 0 && lo <= out[n - 1].hi + 1e-15) {
        out[n - 1].hi = std::max(out[n - 1].hi, hi);
      } else {
        out[n++] = {lo, hi};
      }
    }
  }
  return n;
}

int solve_sinusoid(double a_dot, double b, double c, double bound, bool leq,
                   Interval* out) {
  // a_dot + b sin(t) + c (1 - cos t) = (a_dot + c) + r sin(t + psi)
  const double r = std::hypot(b, c);
  if (r < 1e-15) {
    const bool all = leq ? a_dot <= bound : a_dot >= bound;
    if (!all) return 0;
    out[0] = {0.0, M_PI};
    return 1;
  }
  const double psi = std::atan2(-c, b);
  return sin_bands(psi, (bound - a_dot - c) / r, leq, out);
}

}  // namespace

int theta_intervals(double a_dot, double h1_lo, double h1_hi, double h2_lo,
                    double h2_hi, double eps, std::array<Interval, 4>& out) {
  Interval lower_ok[2];
  const int n_lo = solve_sinusoid(a_dot, h1_lo, h2_lo, eps, /*leq=*/true,
                                  lower_ok);
  if (n_lo == 0) return 0;
  Interval upper_ok[2];
  const int n_hi = solve_sinusoid(a_dot, h1_hi, h2_hi, -eps, /*leq=*/false,
                                  upper_ok);
  if (n_hi == 0) return 0;
  // Intersect two sorted lists of at most 2 disjoint intervals each.
  int n = 0, i = 0, j = 0;
  while (i < n_lo && j < n_hi) {
    const double lo = std::max(lower_ok[i].lo, upper_ok[j].lo);
    const double hi = std::min(lower_ok[i].hi, upper_ok[j].hi);
    if (lo <= hi) out[n++] = {lo, hi};
    if (lower_ok[i].hi < upper_ok[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return n;
}

IntervalSet theta_intervals(double a_dot, double h1_lo, double h1_hi,
                            double h2_lo, double h2_hi, double eps) {
  std::array<Interval, 4> buf;
  const int n = theta_intervals(a_dot, h1_lo, h1_hi, h2_lo, h2_hi, eps, buf);
  IntervalSet set;
  for (int i = 0; i < n; ++i) set.add(buf[i].lo, buf[i].hi);
  set.normalize();
  return set;
}

int exact_theta_intervals(const Eigen::Vector3d& u, const Association& a,
                          double eps, std::array<Interval, 4>& out) {
  const double c1 = h1(u, a);
  const double c2 = h2(u, a);
  return theta_intervals(a.dot, c1, c1, c2, c2, eps, out);
}

double rotation_residual_expanded(double theta, const Eigen::Vector3d& u,
                                  const Association& a) {
  return a.dot + h1(u, a) * std::sin(theta) +
         h2(u, a) * (1.0 - std::cos(theta));
}

}  // namespace satcm
