#include "fovtraj/planner.hpp"

#include "fovtraj/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

namespace fovtraj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2 * kPi);
  if (a <= 0) a += 2 * kPi;
  return a - kPi;
}

// Representative of `target` closest to `reference` modulo 2 pi.
double unwrap_near(double target, double reference) {
  return reference + wrap_angle(target - reference);
}

std::string describe(const CellIndex& c) {
  return "(" + std::to_string(c.x()) + ", " + std::to_string(c.y()) + ", " +
         std::to_string(c.z()) + ")";
}

}  // namespace

void SensorModel::validate() const {
  if (!(apex > 0.0 && apex <= kPi / 2 + 1e-12)) {
    throw ValidationError("sensor apex angle must lie in (0, pi/2]");
  }
  if (!(horizontal_fov > 0.0 && horizontal_fov <= 2 * kPi + 1e-12)) {
    throw ValidationError("sensor horizontal field of view must lie in (0, 2 pi]");
  }
}

double SensorModel::slope() const { return std::tan(apex / 2.0); }

int heading_distance(int a, int b) {
  const int d = ((a - b) % kHeadingCount + kHeadingCount) % kHeadingCount;
  return std::min(d, kHeadingCount - d);
}

LatticeTables build_luts(const GridSpec& spec) {
  LatticeTables t;
  for (int h = 0; h < kHeadingCount; ++h) {
    for (int dz = -1; dz <= 1; ++dz) {
      LatticeEdge& e = t.edges[h * 3 + dz + 1];
      e.delta = {kHeadingStep[h][0], kHeadingStep[h][1], dz};
      e.heading = h;
      const double planar = (h % 2 == 0 ? 1.0 : std::sqrt(2.0)) * spec.cell_xy;
      const double vertical = dz * spec.cell_z;
      e.length = std::sqrt(planar * planar + vertical * vertical);
    }
  }
  t.edges[kPlanarEdgeCount] = {{0, 0, -1}, kNoHeading, spec.cell_z};
  t.edges[kPlanarEdgeCount + 1] = {{0, 0, 1}, kNoHeading, spec.cell_z};
  for (int h = 0; h < kHeadingCount; ++h) {
    for (int e = 0; e < kPlanarEdgeCount; ++e) {
      t.allowed[h][e] = heading_distance(h, t.edges[e].heading) <= 1;
    }
  }
  return t;
}

void ObstacleCostCache::bind(const DistanceField& field) {
  if (field_data_ == field.raw().data() && revision_ == field.source_revision() &&
      values_.size() == field.raw().size()) {
    return;
  }
  values_.assign(field.raw().size(), std::numeric_limits<double>::quiet_NaN());
  revision_ = field.source_revision();
  field_data_ = field.raw().data();
}

double ObstacleCostCache::cost(const DistanceField& field, std::size_t cell) {
  bind(field);
  double& v = values_.at(cell);
  if (std::isnan(v)) {
    v = obstacle_cost(field.at(cell), params_);
    ++evaluations_;
  }
  return v;
}

std::vector<Successor> successors(const SearchNode& node, const DistanceField& field,
                                  const LatticeTables& luts, double d_min, bool allow_vertical) {
  const GridSpec& spec = field.spec();
  std::vector<Successor> out;
  out.reserve(kPlanarEdgeCount);
  auto admissible_target = [&](const CellIndex& c) {
    return spec.in_bounds(c) && field.at(spec.linear_unchecked(c)) >= d_min;
  };
  for (int e = 0; e < kPlanarEdgeCount; ++e) {
    if (node.heading != kWildcardHeading && !luts.allowed[node.heading][e]) continue;
    const CellIndex target = node.cell + luts.edges[e].delta;
    if (!admissible_target(target)) continue;
    out.push_back({{target, luts.edges[e].heading}, e});
  }
  if (allow_vertical) {
    for (int e = kPlanarEdgeCount; e < kPlanarEdgeCount + kVerticalEdgeCount; ++e) {
      const CellIndex target = node.cell + luts.edges[e].delta;
      if (!admissible_target(target)) continue;
      if (node.heading == kWildcardHeading) {
        for (int h = 0; h < kHeadingCount; ++h) out.push_back({{target, h}, e});
      } else {
        out.push_back({{target, node.heading}, e});
      }
    }
  }
  return out;
}

double edge_cost(const LatticeEdge& edge, double target_obstacle_cost, double obstacle_weight) {
  return edge.length * (1.0 + obstacle_weight * target_obstacle_cost);
}

double edge_cost(const LatticeEdge& edge, const DistanceField& field, const CellIndex& target,
                 double obstacle_weight, const ObstacleCostParams& params) {
  return edge_cost(edge, obstacle_cost(field.at(target), params), obstacle_weight);
}

double fov_heuristic(const Eigen::Vector3d& d, double apex, double cell_xy, double cell_z) {
  const double planar = std::hypot(d.x(), d.y());
  const double dz = std::abs(d.z());
  const double z_reach = std::min(dz, std::tan(apex / 2.0) * planar);
  const double staircase =
      std::max(0.0, dz - z_reach) / cell_z * std::sqrt(cell_xy * cell_xy + cell_z * cell_z);
  return std::sqrt(planar * planar + z_reach * z_reach) + staircase;
}

PlannedPath plan(const PlanConfig& config, const OccupancyGrid& grid, const DistanceField& field,
                 ObstacleCostCache* cache) {
  config.sensor.validate();
  config.cost.validate();
  if (!(config.obstacle_weight >= 0.0)) throw ValidationError("obstacle weight must be >= 0");
  const GridSpec& spec = grid.spec();
  if (!(spec == field.spec())) throw ValidationError("distance field does not match the grid");
  if (config.visibility_constrained) {
    const double expected = config.sensor.slope() * spec.cell_xy;
    if (std::abs(spec.cell_z - expected) > 1e-9 * expected) {
      throw ValidationError("grid cell height must equal tan(apex/2) * cell_xy");
    }
  }

  auto endpoint_cell = [&](const Pose& p, const char* what) {
    if (!spec.contains(p.position)) {
      throw InfeasibleEndpointError(std::string(what) + " lies outside the grid");
    }
    const CellIndex c = spec.cell_of(p.position);
    if (grid.occupied(c) || field.at(c) < config.cost.d_min) {
      throw InfeasibleEndpointError(std::string(what) + " cell " + describe(c) +
                                    " is occupied or closer than d_min to an obstacle");
    }
    return c;
  };
  const CellIndex start = endpoint_cell(config.start, "start");
  const CellIndex goal = endpoint_cell(config.goal, "goal");

  ObstacleCostCache local_cache(config.cost);
  ObstacleCostCache& costs = cache ? *cache : local_cache;
  const LatticeTables luts = build_luts(spec);
  const bool vertical = !config.visibility_constrained;
  const bool use_fov = config.heuristic == HeuristicKind::fov && config.visibility_constrained;

  const std::size_t n_cells = spec.cell_count();
  const std::size_t wildcard_id = n_cells * kHeadingCount;
  const std::size_t n_states = wildcard_id + 1;
  auto state_id = [&](const SearchNode& s) {
    return s.heading == kWildcardHeading
               ? wildcard_id
               : spec.linear_unchecked(s.cell) * kHeadingCount + static_cast<std::size_t>(s.heading);
  };
  auto state_node = [&](std::size_t id) {
    if (id == wildcard_id) return SearchNode{start, kWildcardHeading};
    return SearchNode{spec.unlinear(id / kHeadingCount), static_cast<int>(id % kHeadingCount)};
  };

  const Eigen::Vector3d goal_center = spec.center(goal);
  std::vector<double> h_cache(n_cells, -1.0);
  auto heuristic = [&](const CellIndex& c) {
    double& h = h_cache[spec.linear_unchecked(c)];
    if (h < 0.0) {
      const Eigen::Vector3d d = spec.center(c) - goal_center;
      h = use_fov ? fov_heuristic(d, config.sensor.apex, spec.cell_xy, spec.cell_z)
                  : euclidean_heuristic(d);
    }
    return h;
  };

  struct Entry {
    double f;
    double g;
    std::size_t id;
  };
  // Smallest f first; among equal f the larger g; then the smaller id.
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.id > b.id;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
  std::vector<double> g(n_states, kInf);
  std::vector<std::size_t> parent(n_states, n_states);
  std::vector<std::uint8_t> closed(n_states, 0);

  g[wildcard_id] = 0.0;
  open.push({heuristic(start), 0.0, wildcard_id});
  std::size_t expansions = 0;
  std::size_t goal_id = n_states;

  while (!open.empty()) {
    const Entry top = open.top();
    open.pop();
    if (closed[top.id]) continue;
    closed[top.id] = 1;
    ++expansions;
    const SearchNode node = state_node(top.id);
    if (node.cell == goal) {
      goal_id = top.id;
      break;
    }
    for (const Successor& s : successors(node, field, luts, config.cost.d_min, vertical)) {
      const std::size_t sid = state_id(s.node);
      if (closed[sid]) continue;
      const double c_o = costs.cost(field, spec.linear_unchecked(s.node.cell));
      const double ng = top.g + edge_cost(luts.edges[s.edge], c_o, config.obstacle_weight);
      if (ng < g[sid]) {
        g[sid] = ng;
        parent[sid] = top.id;
        open.push({ng + heuristic(s.node.cell), ng, sid});
      }
    }
  }
  if (goal_id == n_states) {
    throw NoPathError("no path from " + describe(start) + " to " + describe(goal) + " after " +
                      std::to_string(expansions) + " expansions");
  }

  std::vector<std::size_t> chain;
  for (std::size_t id = goal_id; id != n_states; id = parent[id]) chain.push_back(id);
  std::reverse(chain.begin(), chain.end());

  PlannedPath path;
  path.cost = g[goal_id];
  path.expansions = expansions;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const SearchNode n = state_node(chain[i]);
    path.waypoints.push_back({spec.center(n.cell), config.start.yaw});
    if (i > 0) {
      const CellIndex delta = n.cell - state_node(chain[i - 1]).cell;
      path.headings.push_back(delta.x() == 0 && delta.y() == 0 ? kNoHeading : n.heading);
    }
  }
  return assign_yaw(path, config.sensor);
}

PlannedPath assign_yaw(const PlannedPath& path, const SensorModel& sensor) {
  if (path.waypoints.empty()) return path;
  PlannedPath out;
  out.cost = path.cost;
  out.expansions = path.expansions;
  const double start_yaw = path.waypoints.front().yaw;

  if (sensor.mode == SensorMode::omnidirectional || path.waypoints.size() == 1) {
    out.waypoints = path.waypoints;
    for (Pose& w : out.waypoints) w.yaw = start_yaw;
    out.headings = path.headings;
    return out;
  }

  const std::size_t segments = path.waypoints.size() - 1;
  // Unwrapped azimuth per segment; segments without planar motion inherit
  // the previous azimuth (or the start yaw).
  std::vector<double> azimuth(segments);
  double previous = start_yaw;
  for (std::size_t i = 0; i < segments; ++i) {
    const Eigen::Vector3d d = path.waypoints[i + 1].position - path.waypoints[i].position;
    if (std::hypot(d.x(), d.y()) > 1e-12) previous = unwrap_near(std::atan2(d.y(), d.x()), previous);
    azimuth[i] = previous;
  }
  const double half_fov = sensor.horizontal_fov / 2.0;
  auto segment_heading = [&](std::size_t i) {
    return i < path.headings.size() ? path.headings[i] : kNoHeading;
  };

  auto push = [&](const Eigen::Vector3d& p, double yaw, int heading_of_previous_segment) {
    if (!out.waypoints.empty()) out.headings.push_back(heading_of_previous_segment);
    out.waypoints.push_back({p, yaw});
  };
  // Turn on the spot to face the first segment.
  push(path.waypoints[0].position, start_yaw, kNoHeading);
  if (std::abs(azimuth[0] - start_yaw) > 1e-12) push(path.waypoints[0].position, azimuth[0], kNoHeading);

  for (std::size_t i = 1; i <= segments; ++i) {
    const Eigen::Vector3d& p = path.waypoints[i].position;
    const double incoming = azimuth[i - 1];
    const double next = i < segments ? azimuth[i] : incoming;
    if (std::abs(next - incoming) <= half_fov + 1e-12) {
      // Turn while flying so the front meets the new direction at the waypoint.
      push(p, next, segment_heading(i - 1));
    } else {
      push(p, incoming, segment_heading(i - 1));
      push(p, next, kNoHeading);
    }
  }
  return out;
}

}  // namespace fovtraj
