#include "satcm/rotation_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace satcm {

namespace {

constexpr double kTieTol = 1e-9;

// Robustness margin of a candidate (u, theta): the smallest slack, over the
// settled samples, of each sample's best inlier. Interior plateau points have
// large margins; plateau corners have margins near zero.
double candidate_margin(const Eigen::Vector3d& u, double theta,
                        std::span<const Association> associations,
                        double eps) {
  std::vector<double> best_slack;
  for (const Association& a : associations) {
    const double slack =
        eps - std::abs(rotation_residual_expanded(theta, u, a));
    if (slack < 0.0) continue;
    if (a.query_index >= static_cast<int>(best_slack.size())) {
      best_slack.resize(a.query_index + 1, -1.0);
    }
    best_slack[a.query_index] = std::max(best_slack[a.query_index], slack);
  }
  double margin = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double s : best_slack) {
    if (s >= 0.0) {
      margin = std::min(margin, s);
      any = true;
    }
  }
  return any ? margin : 0.0;
}

struct NodeOrder {
  bool operator()(const BnBNode& a, const BnBNode& b) const {
    if (a.upper != b.upper) return a.upper < b.upper;
    const double wa = a.cube.width();
    const double wb = b.cube.width();
    if (wa != wb) return wa < wb;  // larger cube explored first
    if (a.cube.alpha_lo != b.cube.alpha_lo)
      return a.cube.alpha_lo > b.cube.alpha_lo;
    return a.cube.phi_lo > b.cube.phi_lo;
  }
};

struct Candidate {
  AxisCube cube;
  IntervalSet theta_regions;
  double value = 0.0;
};

void collect_intervals(const AxisCube& cube,
                       std::span<const Association> associations,
                       double eps, bool relaxed,
                       std::vector<TaggedInterval>& out) {
  out.clear();
  const Eigen::Vector3d u = cube.center();
  std::array<Interval, 4> buf;
  for (const Association& a : associations) {
    int n;
    if (relaxed) {
      const Bounds b1 = h1_bounds(cube, a);
      const Bounds b2 = h2_bounds(cube, a);
      n = theta_intervals(a.dot, b1.lo, b1.hi, b2.lo, b2.hi, eps, buf);
    } else {
      n = exact_theta_intervals(u, a, eps, buf);
    }
    for (int i = 0; i < n; ++i) {
      out.push_back({buf[i].lo, buf[i].hi, a.query_index});
    }
  }
}

}  // namespace

WeightTable make_weight_table(std::span<const Association> associations,
                              const SaturationSpec& spec) {
  int max_query = -1;
  for (const Association& a : associations) {
    max_query = std::max(max_query, a.query_index);
  }
  std::vector<int> m(max_query + 1, 0);
  for (const Association& a : associations) m[a.query_index] += 1;
  return WeightTable(spec, m);
}

std::pair<double, IntervalSet> rotation_lower_bound(
    const AxisCube& cube, std::span<const Association> associations,
    const WeightTable& weights, double epsilon_r) {
  std::vector<TaggedInterval> intervals;
  collect_intervals(cube, associations, epsilon_r, /*relaxed=*/false,
                    intervals);
  StabResult r = sat_stab(intervals, weights);
  return {r.value, std::move(r.optimal_regions)};
}

double rotation_upper_bound(const AxisCube& cube,
                            std::span<const Association> associations,
                            const WeightTable& weights, double epsilon_r) {
  std::vector<TaggedInterval> intervals;
  collect_intervals(cube, associations, epsilon_r, /*relaxed=*/true,
                    intervals);
  return sat_stab(intervals, weights).value;
}

RotationSolution solve_rotation(std::span<const Association> associations,
                                const SaturationSpec& spec,
                                const RotationConfig& config,
                                std::optional<AxisCube> prior_cube) {
  if (associations.empty()) {
    throw std::invalid_argument("solve_rotation: no associations");
  }
  const WeightTable weights = make_weight_table(associations, spec);
  const double eps = config.epsilon_r;

  std::vector<TaggedInterval> scratch;
  auto bound_lower = [&](const AxisCube& cube, double inherited_upper) {
    BnBNode node;
    node.cube = cube;
    collect_intervals(cube, associations, eps, /*relaxed=*/false, scratch);
    StabResult lower = sat_stab(scratch, weights);
    node.lower = lower.value;
    node.best_theta_regions = std::move(lower.optimal_regions);
    node.upper = std::max(inherited_upper, node.lower);
    node.upper_exact = false;
    return node;
  };
  auto tighten_upper = [&](BnBNode& node) {
    collect_intervals(node.cube, associations, eps, /*relaxed=*/true, scratch);
    node.upper = std::max(sat_stab(scratch, weights).value, node.lower);
    node.upper_exact = true;
  };

  std::priority_queue<BnBNode, std::vector<BnBNode>, NodeOrder> queue;
  double best_lower = -1.0;
  std::vector<Candidate> candidates;
  const double ctol = std::max(0.0, config.candidate_tolerance);
  const std::size_t max_candidates = ctol > 0.0 ? 512 : 64;

  auto update_best = [&](const BnBNode& node) {
    if (node.lower > best_lower + kTieTol) {
      best_lower = node.lower;
      std::erase_if(candidates, [&](const Candidate& c) {
        return c.value < best_lower - ctol - kTieTol;
      });
    }
    if (node.lower < best_lower - ctol - kTieTol ||
        candidates.size() >= max_candidates || node.best_theta_regions.empty()) {
      return;
    }
    // One representative per candidate_resolution-sized neighborhood.
    const Eigen::Vector3d center = node.cube.center();
    for (const Candidate& c : candidates) {
      if (std::abs(c.value - node.lower) <= kTieTol &&
          (c.cube.center() - center).norm() <
              0.5 * config.candidate_resolution) {
        return;
      }
    }
    candidates.push_back({node.cube, node.best_theta_regions, node.lower});
  };

  std::vector<AxisCube> roots;
  if (prior_cube.has_value()) {
    roots.push_back(*prior_cube);
  } else {
    roots.push_back({0.0, M_PI, 0.0, M_PI});
    roots.push_back({0.0, M_PI, M_PI, 2.0 * M_PI});
  }
  for (const AxisCube& root : roots) {
    BnBNode node = bound_lower(root, std::numeric_limits<double>::infinity());
    tighten_upper(node);
    update_best(node);
    queue.push(std::move(node));
  }

  // Phase 1 refines until the optimum is certified within the gap; with a
  // candidate tolerance the loop keeps sweeping near-optimal regions at a
  // coarser floor and within a node budget, so downstream selection sees
  // them all.
  long nodes = static_cast<long>(roots.size());
  double leaf_excess = 0.0;
  bool cap_hit = false;
  bool gap_reached = false;
  long sweep_nodes = 0;
  const double sweep_floor =
      std::max(config.candidate_resolution, config.min_cube_width);
  while (!queue.empty()) {
    BnBNode node = queue.top();
    queue.pop();
    if (node.upper <= best_lower + config.gap) gap_reached = true;
    if (node.upper < best_lower - ctol - kTieTol) break;
    if (gap_reached &&
        (ctol <= 0.0 || sweep_nodes >= config.candidate_sweep_nodes)) {
      break;
    }
    const double floor = gap_reached ? sweep_floor : config.min_cube_width;
    if (node.cube.width() <= floor) {
      if (!gap_reached) {
        // Tighten a stale bound before it counts against certification.
        if (!node.upper_exact && node.upper > best_lower + config.gap) {
          tighten_upper(node);
        }
        leaf_excess = std::max(leaf_excess, node.upper - best_lower);
      }
      continue;
    }
    if (!node.upper_exact && !gap_reached) {
      tighten_upper(node);
      if (node.upper >= best_lower - ctol - kTieTol) {
        queue.push(std::move(node));
      }
      continue;
    }
    if (nodes >= config.max_nodes) {
      cap_hit = true;
      leaf_excess = std::max(leaf_excess, node.upper - best_lower);
      break;
    }
    for (const AxisCube& child : node.cube.split()) {
      BnBNode c = bound_lower(child, node.upper);
      ++nodes;
      if (gap_reached) ++sweep_nodes;
      update_best(c);
      if (c.upper >= best_lower - ctol - kTieTol) {
        queue.push(std::move(c));
      }
    }
  }
  if (queue.empty() && !cap_hit) gap_reached = true;

  RotationSolution solution;
  solution.value = best_lower;
  solution.achieved_gap = std::max(leaf_excess, 0.0);
  solution.certified = !cap_hit && gap_reached && leaf_excess <= config.gap;
  solution.nodes_explored = nodes;

  // Gap termination leaves tied candidates at coarse cubes, which may sit
  // anywhere on a consensus plateau. Each tie is polished by a compass
  // search maximizing the margin while staying on the optimum set: the
  // margin is a min of concave slacks, so the search settles at the
  // plateau's most interior point (the ground truth itself for noiseless
  // data). Every accepted step is still an exact global optimum.
  auto evaluate = [&](const Eigen::Vector3d& u, double theta) {
    std::pair<double, double> out{0.0, 0.0};  // value, margin
    std::vector<int> counts(weights.sample_count(), 0);
    std::vector<double> slack(weights.sample_count(), -1.0);
    for (const Association& a : associations) {
      const double s =
          eps - std::abs(rotation_residual_expanded(theta, u, a));
      if (s < 0.0) continue;
      counts[a.query_index] += 1;
      slack[a.query_index] = std::max(slack[a.query_index], s);
    }
    double margin = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int k = 0; k < weights.sample_count(); ++k) {
      out.first += weights.sigma(k, counts[k]);
      if (slack[k] >= 0.0) {
        margin = std::min(margin, slack[k]);
        any = true;
      }
    }
    out.second = any ? margin : 0.0;
    return out;
  };

  auto polish = [&](Eigen::Vector3d u, double theta, double start_step,
                    double value_floor) {
    double margin = evaluate(u, theta).second;
    double step = std::max(start_step, 1e-3);
    while (step > 1e-6) {
      const Eigen::Vector3d ref = std::abs(u.x()) < 0.9
                                      ? Eigen::Vector3d::UnitX()
                                      : Eigen::Vector3d::UnitY();
      const Eigen::Vector3d e1 = u.cross(ref).normalized();
      const Eigen::Vector3d e2 = u.cross(e1);
      const std::array<std::pair<Eigen::Vector3d, double>, 6> moves = {
          std::pair{(u + step * e1).normalized(), theta},
          std::pair{(u - step * e1).normalized(), theta},
          std::pair{(u + step * e2).normalized(), theta},
          std::pair{u, std::clamp(theta + step, 0.0, M_PI)},
          std::pair{u, std::clamp(theta - step, 0.0, M_PI)},
          std::pair{(u + step * (e1 + e2)).normalized(), theta}};
      bool improved = false;
      for (const auto& [mu, mtheta] : moves) {
        const auto [v, m] = evaluate(mu, mtheta);
        if (v >= value_floor - kTieTol && m > margin + 1e-15) {
          u = mu;
          theta = mtheta;
          margin = m;
          improved = true;
          break;
        }
      }
      if (!improved) step *= 0.5;
    }
    return std::tuple{u, theta, margin};
  };

  struct Scored {
    Eigen::Vector3d axis;  // search axis
    double theta;
    double value;
    double margin;
    std::size_t order;
  };
  std::vector<Scored> scored;
  // Highest values first; raw margin breaks ties for the polish budget.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.value > b.value;
                   });
  constexpr std::size_t kMaxPolish = 24;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Candidate& cand = candidates[c];
    const Eigen::Vector3d u0 = cand.cube.center();
    for (const Interval& region : cand.theta_regions) {
      if (c < kMaxPolish) {
        // Center the candidate on its own value plateau.
        const auto [u, theta, margin] =
            polish(u0, region.mid(), 0.5 * cand.cube.width(), cand.value);
        const double v = evaluate(u, theta).first;
        scored.push_back({u, theta, v, margin, scored.size()});
      }
      scored.push_back({u0, region.mid(), cand.value,
                        candidate_margin(u0, region.mid(), associations, eps),
                        scored.size()});
    }
  }

  // Optimum ties first, then near-ties; most interior representative first
  // within a value level; discovery order breaks exact ties.
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) {
                     if (std::abs(a.value - b.value) > kTieTol) {
                       return a.value > b.value;
                     }
                     if (a.margin != b.margin) return a.margin > b.margin;
                     return a.order < b.order;
                   });

  const double dedup_angle =
      ctol > 0.0 ? std::max(config.candidate_resolution, config.min_cube_width)
                 : std::max(config.min_cube_width, 1e-6);
  constexpr std::size_t kMaxRotations = 64;
  for (const Scored& cand : scored) {
    if (solution.rotations.size() >= kMaxRotations) break;
    const AxisAngle pose_rot = AxisAngle::from_axis(-cand.axis, cand.theta);
    const Eigen::Matrix3d r = rotation_matrix(pose_rot);
    bool duplicate = false;
    for (const AxisAngle& kept : solution.rotations) {
      if (rotation_error_deg(rotation_matrix(kept), r) <
          dedup_angle * 180.0 / M_PI) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    solution.rotations.push_back(pose_rot);
    std::vector<int> inliers;
    for (std::size_t i = 0; i < associations.size(); ++i) {
      if (std::abs(rotation_residual_expanded(cand.theta, cand.axis,
                                              associations[i])) <= eps) {
        inliers.push_back(static_cast<int>(i));
      }
    }
    solution.inlier_sets.push_back(std::move(inliers));
  }
  return solution;
}

}  // namespace satcm
