#pragma once

#include "fovtraj/distance_field.hpp"
#include "fovtraj/grid.hpp"
#include "fovtraj/obstacle_cost.hpp"
#include "fovtraj/scene.hpp"

#include <Eigen/Core>

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

namespace fovtraj {

enum class SensorMode { omnidirectional, front_facing };

/// Obstacle sensor geometry. `apex` is the full vertical opening angle; the
/// vehicle must ascend/descend within +-apex/2.
struct SensorModel {
  double apex = std::numbers::pi / 6;  // 30 deg
  double horizontal_fov = 2 * std::numbers::pi;
  SensorMode mode = SensorMode::omnidirectional;

  void validate() const;
  double slope() const;  ///< tan(apex / 2)
};

inline constexpr int kHeadingCount = 8;
/// Start-node heading that matches every planar direction.
inline constexpr int kWildcardHeading = -1;
/// Segment tag for moves without a planar direction (vertical moves and
/// in-place rotations).
inline constexpr int kNoHeading = -1;

/// Planar unit step for heading h; heading h points at azimuth h * 45 deg.
inline constexpr std::array<std::array<int, 2>, kHeadingCount> kHeadingStep{
    {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

/// Circular distance between two headings in 45 deg steps (0..4).
int heading_distance(int a, int b);

struct SearchNode {
  CellIndex cell = CellIndex::Zero();
  int heading = kWildcardHeading;

  bool operator==(const SearchNode& o) const { return cell == o.cell && heading == o.heading; }
};

/// One move of the pruned Moore neighborhood.
struct LatticeEdge {
  Eigen::Vector3i delta = Eigen::Vector3i::Zero();
  int heading = kNoHeading;  ///< planar direction, kNoHeading for vertical moves
  double length = 0.0;       ///< metric length
};

inline constexpr int kPlanarEdgeCount = 24;
inline constexpr int kVerticalEdgeCount = 2;

/// Precomputed edge geometry and heading-transition admissibility.
///
/// Edges 0..23 are the planar-direction moves, ordered as heading * 3 +
/// (dz + 1). Edges 24 and 25 are the straight down/up moves, only used when
/// planning without the visibility constraint.
struct LatticeTables {
  std::array<LatticeEdge, kPlanarEdgeCount + kVerticalEdgeCount> edges{};
  /// allowed[h][e]: edge e may follow a move with heading h.
  std::array<std::bitset<kPlanarEdgeCount>, kHeadingCount> allowed{};
};

LatticeTables build_luts(const GridSpec& spec);

/// Per-cell obstacle cost, evaluated lazily once per 3D cell and shared by
/// all heading layers. The cache resets itself when handed a field built
/// from a different grid revision.
class ObstacleCostCache {
 public:
  explicit ObstacleCostCache(const ObstacleCostParams& params) : params_(params) {}

  double cost(const DistanceField& field, std::size_t cell);
  /// Number of obstacle_cost evaluations performed so far.
  std::size_t evaluations() const { return evaluations_; }
  const ObstacleCostParams& params() const { return params_; }

 private:
  void bind(const DistanceField& field);

  ObstacleCostParams params_;
  std::vector<double> values_;
  std::uint64_t revision_ = 0;
  const double* field_data_ = nullptr;
  std::size_t evaluations_ = 0;
};

struct Successor {
  SearchNode node;
  int edge = 0;  ///< index into LatticeTables::edges
};

/// Lattice successors of `node`: in-bounds moves whose heading is within one
/// 45 deg step of the node heading and whose target clearance is >= d_min.
/// With `allow_vertical` the two straight vertical moves are added; they
/// keep the node heading (a wildcard start fans out to all eight).
std::vector<Successor> successors(const SearchNode& node, const DistanceField& field,
                                  const LatticeTables& luts, double d_min,
                                  bool allow_vertical = false);

/// length * (1 + obstacle_weight * obstacle_cost(clearance at target)).
double edge_cost(const LatticeEdge& edge, double target_obstacle_cost, double obstacle_weight);
double edge_cost(const LatticeEdge& edge, const DistanceField& field, const CellIndex& target,
                 double obstacle_weight, const ObstacleCostParams& params);

/// Visibility-aware lower bound on the lattice path length for a
/// displacement `d`: Euclidean distance to the closest point reachable along
/// the ascent cone plus the cheapest staircase for the remaining altitude.
double fov_heuristic(const Eigen::Vector3d& d, double apex, double cell_xy, double cell_z);
inline double euclidean_heuristic(const Eigen::Vector3d& d) { return d.norm(); }

enum class HeuristicKind { fov, euclidean };

struct PlanConfig {
  Pose start;
  Pose goal;
  SensorModel sensor;
  double obstacle_weight = 1.0;  ///< lambda_o
  ObstacleCostParams cost;
  HeuristicKind heuristic = HeuristicKind::fov;
  /// When false the straight vertical moves are allowed (and the Euclidean
  /// heuristic is forced, since the cone bound no longer holds).
  bool visibility_constrained = true;
};

struct PlannedPath {
  std::vector<Pose> waypoints;
  /// headings[i] is the planar heading of the segment waypoints[i] ->
  /// waypoints[i + 1], or kNoHeading.
  std::vector<int> headings;
  double cost = 0.0;
  std::size_t expansions = 0;
};

/// A* over (cell, heading). The start is seeded with the wildcard heading at
/// zero cost; any heading at the goal cell terminates. Yaw is assigned with
/// assign_yaw(). Throws InfeasibleEndpointError or NoPathError.
PlannedPath plan(const PlanConfig& config, const OccupancyGrid& grid, const DistanceField& field,
                 ObstacleCostCache* cache = nullptr);

/// Fills in yaw per waypoint according to the sensor mode, inserting
/// zero-translation rotation waypoints where a segment would leave the
/// horizontal field of view. The first waypoint's yaw is taken as the
/// current vehicle yaw.
PlannedPath assign_yaw(const PlannedPath& path, const SensorModel& sensor);

}  // namespace fovtraj
