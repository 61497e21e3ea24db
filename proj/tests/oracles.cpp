#include "oracles.hpp"

#include "fovtraj/planner.hpp"

#include <cmath>
#include <functional>
#include <queue>

namespace oracle {

using fovtraj::CellIndex;

std::vector<double> brute_force_edt(const fovtraj::OccupancyGrid& grid) {
  const auto& spec = grid.spec();
  const std::size_t n = spec.cell_count();
  std::vector<Eigen::Vector3d> occupied;
  for (std::size_t i = 0; i < n; ++i)
    if (grid.occupied(i)) occupied.push_back(spec.center(spec.unlinear(i)));
  std::vector<double> out(n, spec.diagonal());
  if (occupied.empty()) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d c = spec.center(spec.unlinear(i));
    double best = kInf;
    for (const auto& o : occupied) best = std::min(best, (c - o).squaredNorm());
    out[i] = std::sqrt(best);
  }
  return out;
}

namespace {

constexpr int kDir[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};

bool turn_ok(int from, int to) {
  if (from < 0) return true;
  const int d = std::abs(from - to) % 8;
  return std::min(d, 8 - d) <= 1;
}

struct Move {
  CellIndex target;
  int heading;
  double cost;
};

double move_cost(const Lattice& l, int dir, int dz, const CellIndex& target) {
  const auto& spec = l.field->spec();
  const double dx = kDir[dir][0] * spec.cell_xy, dy = kDir[dir][1] * spec.cell_xy;
  const double len = std::sqrt(dx * dx + dy * dy + dz * dz * spec.cell_z * spec.cell_z);
  return len * (1.0 + l.obstacle_weight * fovtraj::obstacle_cost(l.field->at(target), l.cost));
}

bool enterable(const Lattice& l, const CellIndex& c) {
  return l.field->spec().in_bounds(c) && l.field->at(c) >= l.cost.d_min;
}

using Entry = std::pair<double, std::size_t>;
using Queue = std::priority_queue<Entry, std::vector<Entry>, std::greater<>>;

}  // namespace

double dijkstra_cost(const Lattice& l, const CellIndex& start, const CellIndex& goal) {
  const auto& spec = l.field->spec();
  std::vector<double> dist(spec.cell_count() * 9, kInf);
  Queue q;
  const std::size_t s = state_id(spec.linear(start), -1);
  dist[s] = 0.0;
  q.push({0.0, s});
  const std::size_t goal_cell = spec.linear(goal);
  while (!q.empty()) {
    const auto [d, id] = q.top();
    q.pop();
    if (d > dist[id]) continue;
    const std::size_t cell = id / 9;
    const int heading = static_cast<int>(id % 9) - 1;
    if (cell == goal_cell) return d;
    const CellIndex c = spec.unlinear(cell);
    for (int dir = 0; dir < 8; ++dir) {
      if (!turn_ok(heading, dir)) continue;
      for (int dz = -1; dz <= 1; ++dz) {
        const CellIndex t(c.x() + kDir[dir][0], c.y() + kDir[dir][1], c.z() + dz);
        if (!enterable(l, t)) continue;
        const double nd = d + move_cost(l, dir, dz, t);
        const std::size_t tid = state_id(spec.linear(t), dir);
        if (nd < dist[tid]) {
          dist[tid] = nd;
          q.push({nd, tid});
        }
      }
    }
  }
  return kInf;
}

std::vector<double> cost_to_go(const Lattice& l, const CellIndex& goal) {
  const auto& spec = l.field->spec();
  std::vector<double> dist(spec.cell_count() * 9, kInf);
  Queue q;
  const std::size_t g = spec.linear(goal);
  for (int h = -1; h < 8; ++h) {
    dist[state_id(g, h)] = 0.0;
    q.push({0.0, state_id(g, h)});
  }
  while (!q.empty()) {
    const auto [d, id] = q.top();
    q.pop();
    if (d > dist[id]) continue;
    const int heading = static_cast<int>(id % 9) - 1;
    if (heading < 0) continue;  // wildcard states have no incoming moves
    const CellIndex t = spec.unlinear(id / 9);
    // Every move with this heading that ends in t.
    for (int dz = -1; dz <= 1; ++dz) {
      const CellIndex src(t.x() - kDir[heading][0], t.y() - kDir[heading][1], t.z() - dz);
      if (!spec.in_bounds(src) || !enterable(l, t)) continue;
      const double nd = d + move_cost(l, heading, dz, t);
      const std::size_t sc = spec.linear(src);
      for (int h = -1; h < 8; ++h) {
        if (!turn_ok(h, heading)) continue;
        const std::size_t sid = state_id(sc, h);
        if (sc == g) continue;
        if (nd < dist[sid]) {
          dist[sid] = nd;
          q.push({nd, sid});
        }
      }
    }
  }
  return dist;
}

Eigen::MatrixXd dense_control_matrix(int samples, double dt) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(std::max(samples - 2, 0), samples);
  for (int r = 0; r + 2 < samples; ++r) {
    K(r, r) = 1.0 / (dt * dt);
    K(r, r + 1) = -2.0 / (dt * dt);
    K(r, r + 2) = 1.0 / (dt * dt);
  }
  return K.transpose() * K;
}

Eigen::MatrixX4d numeric_gradient(const fovtraj::Trajectory& traj,
                                  const std::function<double(const fovtraj::Trajectory&)>& f,
                                  double h) {
  Eigen::MatrixX4d g = Eigen::MatrixX4d::Zero(traj.pose.rows(), 4);
  fovtraj::Trajectory t = traj;
  for (Eigen::Index r = 0; r < t.pose.rows(); ++r)
    for (int c = 0; c < 4; ++c) {
      const double x = t.pose(r, c);
      t.pose(r, c) = x + h;
      const double up = f(t);
      t.pose(r, c) = x - h;
      const double down = f(t);
      t.pose(r, c) = x;
      g(r, c) = (up - down) / (2 * h);
    }
  return g;
}

fovtraj::OccupancyGrid random_grid(const fovtraj::GridSpec& spec, double p, std::mt19937_64& rng) {
  fovtraj::OccupancyGrid grid(spec);
  std::bernoulli_distribution occ(p);
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < spec.cell_count(); ++i)
    if (occ(rng)) cells.push_back(i);
  grid.set_occupied_many(cells);
  return grid;
}

}  // namespace oracle
