#pragma once

#include "fovtraj/grid.hpp"
#include "fovtraj/planner.hpp"
#include "fovtraj/replan.hpp"
#include "fovtraj/retime.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

namespace fovtraj {

struct VehicleState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double yaw = 0.0;
  double time = 0.0;
};

struct FollowerGains {
  double kp = 4.0;  ///< 1/s^2
  double kd = 3.0;  ///< 1/s
  double yaw_gain = 2.0;  ///< 1/s
  double yaw_rate_max = std::numbers::pi / 2;
};

struct Command {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double yaw = 0.0;
};

/// PD step with velocity feedforward: a = kp (p_cmd - p) + kd (v_cmd - v),
/// clamped to |a| <= a_max, integrated with semi-implicit Euler.
VehicleState follower_step(const VehicleState& state, const Command& command, double dt,
                           const FollowerGains& gains, double a_max);

struct FlightRecord {
  double time = 0.0;
  Eigen::Vector3d commanded = Eigen::Vector3d::Zero();
  double commanded_yaw = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double yaw = 0.0;
  double clearance = 0.0;  ///< distance to the true obstacles
};

struct FlightSummary {
  double ate_mean = 0.0;
  double ate_rmse = 0.0;
  double max_speed = 0.0;
  double min_clearance = 0.0;
  bool collision = false;
  std::optional<std::size_t> first_collision_step;
  std::size_t map_updates = 0;
  std::optional<double> first_revelation_time;
};

struct FlightLog {
  std::vector<FlightRecord> records;
  FlightSummary summary;
  std::vector<CycleRecord> cycles;
  /// Smallest clearance of the not yet flown part of every merged
  /// trajectory published after the first revelation, measured against the
  /// map snapshot of its cycle and skipping the first such cycle. Infinity
  /// when no such cycle ran.
  double merged_min_clearance = 0.0;
  /// Smallest true clearance of the vehicle from one cycle after the first
  /// revelation onward (infinity without revelation).
  double clearance_after_reaction = 0.0;
  std::size_t failed_cycles = 0;
  /// Trajectory active at the end of the flight.
  Trajectory final_trajectory;
};

struct SimConfig {
  double sensor_range = 15.0;
  SensorModel sensor;
  FollowerGains gains;
  double a_max = 2.0;
  double vehicle_radius = 0.5;
  /// Reoptimize while flying; cycles are triggered every `cycle_time`.
  std::optional<ReplanConfig> replan;
  /// Cycle duration assumed for the splice. A fixed value keeps runs
  /// reproducible; the measured wall time is logged separately.
  double cycle_time = 0.2;
};

/// Cells of `truth` that a sensor at `pose` sees: within range of the cell
/// center, inside the vertical cone and, in front-facing mode, inside the
/// horizontal field of view.
std::vector<std::size_t> visible_cells(const OccupancyGrid& truth, const Eigen::Vector3d& position,
                                       double yaw, double range, const SensorModel& sensor);

/// Flies `trajectory` with the follower. Newly sensed obstacles are copied
/// into `known`; with a replan config the remaining trajectory is
/// reoptimized against the known map.
FlightLog simulate(const Trajectory& trajectory, const OccupancyGrid& truth, OccupancyGrid& known,
                   const SimConfig& config);

/// (mean, root mean square) of the per-record position errors. Throws
/// std::invalid_argument for an empty log.
std::pair<double, double> ate(const FlightLog& log);

void write_flight_log(std::ostream& os, const FlightLog& log);

}  // namespace fovtraj
