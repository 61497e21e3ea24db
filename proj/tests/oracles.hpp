#pragma once

#include "fovtraj/distance_field.hpp"
#include "fovtraj/grid.hpp"
#include "fovtraj/obstacle_cost.hpp"
#include "fovtraj/retime.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Nearest occupied cell center by scanning every pair of cells.
std::vector<double> brute_force_edt(const fovtraj::OccupancyGrid& grid);

/// Lattice edge model rebuilt from first principles: eight planar
/// directions times dz in {-1, 0, 1}, heading changes of at most 45 deg,
/// target cells need clearance >= d_min, multiplicative obstacle cost.
struct Lattice {
  const fovtraj::DistanceField* field = nullptr;
  fovtraj::ObstacleCostParams cost;
  double obstacle_weight = 1.0;
};

/// State index = linear cell * 9 + (heading + 1); heading -1 is the wildcard.
inline std::size_t state_id(std::size_t cell, int heading) {
  return cell * 9 + static_cast<std::size_t>(heading + 1);
}

/// Cheapest cost from (start, wildcard) to any state at the goal cell, or
/// infinity when unreachable.
double dijkstra_cost(const Lattice& lattice, const fovtraj::CellIndex& start,
                     const fovtraj::CellIndex& goal);

/// Exact cost-to-go from every (cell, heading) state to the goal cell,
/// computed by a backward search. Wildcard entries hold the cost from a
/// wildcard start at that cell.
std::vector<double> cost_to_go(const Lattice& lattice, const fovtraj::CellIndex& goal);

/// Dense K^T K with K the interior second-difference rows at step dt.
Eigen::MatrixXd dense_control_matrix(int samples, double dt);

/// Central-difference gradient of `f` with respect to every pose coordinate.
Eigen::MatrixX4d numeric_gradient(const fovtraj::Trajectory& traj,
                                  const std::function<double(const fovtraj::Trajectory&)>& f,
                                  double h = 1e-6);

/// Random grid of the given size with every cell occupied with probability p.
fovtraj::OccupancyGrid random_grid(const fovtraj::GridSpec& spec, double p, std::mt19937_64& rng);

}  // namespace oracle
