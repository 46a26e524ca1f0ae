#include "satcm/translation_solver.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "satcm/interval_stabbing.hpp"

namespace satcm {

namespace {

constexpr double kTieTol = 1e-9;
constexpr double kZeroCoeff = 1e-12;
constexpr double kDepthClip = 1e-6;

IntervalSet x_interval_from_offset(double n_x, double b_lo, double b_hi,
                                   const Interval& x_range, double eps) {
  // Exists b in [b_lo, b_hi] with |n_x x + b| <= eps
  //   <=>  n_x x in [-eps - b_hi, eps - b_lo].
  if (std::abs(n_x) < kZeroCoeff) {
    if (b_lo <= eps && b_hi >= -eps) {
      return IntervalSet::single(x_range.lo, x_range.hi);
    }
    return {};
  }
  double lo = (-eps - b_hi) / n_x;
  double hi = (eps - b_lo) / n_x;
  if (n_x < 0.0) std::swap(lo, hi);
  lo = std::max(lo, x_range.lo);
  hi = std::min(hi, x_range.hi);
  if (lo > hi) return {};
  return IntervalSet::single(lo, hi);
}

}  // namespace

TransAssociation::TransAssociation(int query, const Eigen::Vector3d& n_star_in,
                                   const Eigen::Vector3d& anchor,
                                   const std::array<Eigen::Vector3d, 2>& segment)
    : query_index(query),
      n_star(n_star_in),
      p(anchor),
      const_a(n_star_in.dot(anchor)),
      endpoints(segment) {}

std::optional<Eigen::Vector3d> project_normal(const Eigen::Vector3d& n_rotated,
                                              const Eigen::Vector3d& v_map) {
  const Eigen::Vector3d proj = n_rotated - n_rotated.dot(v_map) * v_map;
  const double norm = proj.norm();
  if (norm < 1e-9) return std::nullopt;
  return proj / norm;
}

double TransCube::width() const {
  return std::max(y_hi - y_lo, z_hi - z_lo);
}

std::array<TransCube, 4> TransCube::split() const {
  const double ym = 0.5 * (y_lo + y_hi);
  const double zm = 0.5 * (z_lo + z_hi);
  return {TransCube{y_lo, ym, z_lo, zm}, TransCube{y_lo, ym, zm, z_hi},
          TransCube{ym, y_hi, z_lo, zm}, TransCube{ym, y_hi, zm, z_hi}};
}

IntervalSet trans_theta_intervals(const TransAssociation& a, double t_y,
                                  double t_z, const Interval& x_range,
                                  double epsilon_t) {
  const double b = a.n_star.y() * t_y + a.n_star.z() * t_z - a.const_a;
  return x_interval_from_offset(a.n_star.x(), b, b, x_range, epsilon_t);
}

IntervalSet trans_theta_intervals(const TransAssociation& a,
                                  const TransCube& rect,
                                  const Interval& x_range, double epsilon_t) {
  double b_lo = std::numeric_limits<double>::infinity();
  double b_hi = -b_lo;
  for (double y : {rect.y_lo, rect.y_hi}) {
    for (double z : {rect.z_lo, rect.z_hi}) {
      const double b = a.n_star.y() * y + a.n_star.z() * z - a.const_a;
      b_lo = std::min(b_lo, b);
      b_hi = std::max(b_hi, b);
    }
  }
  return x_interval_from_offset(a.n_star.x(), b_lo, b_hi, x_range, epsilon_t);
}

namespace {

struct TransNode {
  TransCube cube;
  double upper = 0.0;
  double lower = 0.0;
  IntervalSet x_regions;
};

struct TransOrder {
  bool operator()(const TransNode& a, const TransNode& b) const {
    if (a.upper != b.upper) return a.upper < b.upper;
    const double wa = a.cube.width();
    const double wb = b.cube.width();
    if (wa != wb) return wa < wb;
    if (a.cube.y_lo != b.cube.y_lo) return a.cube.y_lo > b.cube.y_lo;
    return a.cube.z_lo > b.cube.z_lo;
  }
};

}  // namespace

TranslationSolution solve_translation(
    std::span<const TransAssociation> associations, const SaturationSpec& spec,
    const TranslationConfig& config, const Eigen::AlignedBox3d& scene_box) {
  if (associations.empty()) {
    throw std::invalid_argument("solve_translation: no associations");
  }

  // Distinguish the scene axis with the largest extent; cyclic permutation so
  // it becomes the stabbed x axis.
  const Eigen::Vector3d extent = scene_box.sizes();
  int d = 0;
  if (extent.y() > extent.x()) d = 1;
  if (extent.z() > extent[d]) d = 2;
  const std::array<int, 3> perm = {d, (d + 1) % 3, (d + 2) % 3};

  std::vector<TransAssociation> local(associations.begin(), associations.end());
  std::vector<int> m_counts;
  for (TransAssociation& a : local) {
    const Eigen::Vector3d n = a.n_star;
    const Eigen::Vector3d p = a.p;
    for (int i = 0; i < 3; ++i) {
      a.n_star[i] = n[perm[i]];
      a.p[i] = p[perm[i]];
    }
    if (a.query_index >= static_cast<int>(m_counts.size())) {
      m_counts.resize(a.query_index + 1, 0);
    }
    m_counts[a.query_index] += 1;
  }
  const WeightTable weights(spec, m_counts);

  const Interval x_range{scene_box.min()[perm[0]], scene_box.max()[perm[0]]};
  const TransCube root{scene_box.min()[perm[1]], scene_box.max()[perm[1]],
                       scene_box.min()[perm[2]], scene_box.max()[perm[2]]};

  std::vector<TaggedInterval> scratch;
  auto bound_node = [&](const TransCube& cube) {
    TransNode node;
    node.cube = cube;
    const double yc = 0.5 * (cube.y_lo + cube.y_hi);
    const double zc = 0.5 * (cube.z_lo + cube.z_hi);
    scratch.clear();
    for (const TransAssociation& a : local) {
      for (const Interval& iv :
           trans_theta_intervals(a, yc, zc, x_range, config.epsilon_t)) {
        scratch.push_back({iv.lo, iv.hi, a.query_index});
      }
    }
    StabResult lower = sat_stab(scratch, weights);
    node.lower = lower.value;
    node.x_regions = std::move(lower.optimal_regions);
    scratch.clear();
    for (const TransAssociation& a : local) {
      for (const Interval& iv :
           trans_theta_intervals(a, cube, x_range, config.epsilon_t)) {
        scratch.push_back({iv.lo, iv.hi, a.query_index});
      }
    }
    node.upper = std::max(sat_stab(scratch, weights).value, node.lower);
    return node;
  };

  struct Candidate {
    double y, z;
    IntervalSet x_regions;
    double value;
  };
  std::priority_queue<TransNode, std::vector<TransNode>, TransOrder> queue;
  double best_lower = -1.0;
  std::vector<Candidate> candidates;
  constexpr std::size_t kMaxCandidates = 64;

  auto update_best = [&](const TransNode& node) {
    const double yc = 0.5 * (node.cube.y_lo + node.cube.y_hi);
    const double zc = 0.5 * (node.cube.z_lo + node.cube.z_hi);
    if (node.lower > best_lower + kTieTol) {
      best_lower = node.lower;
      candidates.clear();
      candidates.push_back({yc, zc, node.x_regions, node.lower});
    } else if (node.lower >= best_lower - kTieTol &&
               candidates.size() < kMaxCandidates) {
      candidates.push_back({yc, zc, node.x_regions, node.lower});
    }
  };

  TransNode root_node = bound_node(root);
  update_best(root_node);
  queue.push(std::move(root_node));

  long nodes = 1;
  double leaf_excess = 0.0;
  bool cap_hit = false;
  while (!queue.empty()) {
    TransNode node = queue.top();
    queue.pop();
    if (node.upper <= best_lower + config.gap) break;
    if (node.cube.width() <= config.min_cube_width) {
      leaf_excess = std::max(leaf_excess, node.upper - best_lower);
      continue;
    }
    if (nodes >= config.max_nodes) {
      cap_hit = true;
      leaf_excess = std::max(leaf_excess, node.upper - best_lower);
      break;
    }
    for (const TransCube& child : node.cube.split()) {
      TransNode c = bound_node(child);
      ++nodes;
      update_best(c);
      if (c.upper >= best_lower - kTieTol) queue.push(std::move(c));
    }
  }

  TranslationSolution solution;
  solution.value = best_lower;
  solution.certified = !cap_hit && leaf_excess <= config.gap;
  solution.nodes_explored = nodes;
  for (const Candidate& cand : candidates) {
    if (cand.value < best_lower - kTieTol) continue;
    for (const Interval& region : cand.x_regions) {
      Eigen::Vector3d t_local(region.mid(), cand.y, cand.z);
      TranslationCandidate out;
      for (int i = 0; i < 3; ++i) out.t[perm[i]] = t_local[i];
      out.value = cand.value;
      for (std::size_t i = 0; i < associations.size(); ++i) {
        const TransAssociation& a = associations[i];
        if (std::abs(a.n_star.dot(a.p - out.t)) <= config.epsilon_t) {
          out.inliers.push_back(static_cast<int>(i));
        }
      }
      solution.candidates.push_back(std::move(out));
    }
  }
  return solution;
}

namespace {

bool point_in_rect(const Eigen::Vector2d& p, double w, double h) {
  return p.x() >= 0.0 && p.x() <= w && p.y() >= 0.0 && p.y() <= h;
}

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a,
              const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                        const Eigen::Vector2d& q1, const Eigen::Vector2d& q2) {
  const double d1 = cross2(q1, q2, p1);
  const double d2 = cross2(q1, q2, p2);
  const double d3 = cross2(p1, p2, q1);
  const double d4 = cross2(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

bool segment_meets_rect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                        double w, double h) {
  if (point_in_rect(p1, w, h) || point_in_rect(p2, w, h)) return true;
  const Eigen::Vector2d c00(0, 0), c10(w, 0), c01(0, h), c11(w, h);
  return segments_intersect(p1, p2, c00, c10) ||
         segments_intersect(p1, p2, c10, c11) ||
         segments_intersect(p1, p2, c11, c01) ||
         segments_intersect(p1, p2, c01, c00);
}

}  // namespace

std::vector<int> prune_inliers(const Eigen::Vector3d& t,
                               const Eigen::Matrix3d& r,
                               std::span<const TransAssociation> associations,
                               std::span<const int> inliers,
                               const Intrinsics& intr) {
  std::vector<int> kept;
  const Eigen::Matrix3d rt = r.transpose();
  for (int idx : inliers) {
    const TransAssociation& a = associations[idx];
    Eigen::Vector3d e1 = rt * (a.endpoints[0] - t);
    Eigen::Vector3d e2 = rt * (a.endpoints[1] - t);
    if (e1.z() <= 0.0 && e2.z() <= 0.0) continue;
    // Clip the behind part at the near plane before projecting.
    if (e1.z() < kDepthClip || e2.z() < kDepthClip) {
      if (e1.z() < e2.z()) std::swap(e1, e2);
      if (e1.z() < kDepthClip) continue;  // both effectively at the plane
      const double w = (kDepthClip - e1.z()) / (e2.z() - e1.z());
      e2 = e1 + w * (e2 - e1);
    }
    const Eigen::Vector3d px1 = intr.k * e1;
    const Eigen::Vector3d px2 = intr.k * e2;
    const Eigen::Vector2d p1 = px1.head<2>() / px1.z();
    const Eigen::Vector2d p2 = px2.head<2>() / px2.z();
    if (segment_meets_rect(p1, p2, intr.width, intr.height)) {
      kept.push_back(idx);
    }
  }
  return kept;
}

RefineResult refine_translation(std::span<const TransAssociation> associations,
                                std::span<const int> inliers,
                                const Eigen::Vector3d& fallback) {
  RefineResult result;
  result.t = fallback;

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (int idx : inliers) {
    const TransAssociation& a = associations[idx];
    h += a.n_star * a.n_star.transpose();
    g += a.n_star * a.const_a;
  }
  auto residual_sum = [&](const Eigen::Vector3d& t) {
    double s = 0.0;
    for (int idx : inliers) {
      const TransAssociation& a = associations[idx];
      const double r = a.n_star.dot(a.p - t);
      s += r * r;
    }
    return s;
  };

  if (inliers.size() < 3) {
    result.squared_residual = residual_sum(fallback);
    return result;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(h);
  if (es.eigenvalues()(0) < 1e-9 * std::max(1.0, es.eigenvalues()(2))) {
    result.squared_residual = residual_sum(fallback);
    return result;  // normals do not span 3D
  }
  result.t = h.ldlt().solve(g);
  result.full_rank = true;
  result.squared_residual = residual_sum(result.t);
  return result;
}

}  // namespace satcm
