#pragma once

#include "fovtraj/distance_field.hpp"
#include "fovtraj/obstacle_cost.hpp"
#include "fovtraj/retime.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <numbers>
#include <ostream>
#include <utility>
#include <vector>

namespace fovtraj {

struct OptimizerConfig {
  double w_obstacle = 10.0;
  double w_acceleration = 1.0;
  double w_velocity = 1.0;
  double w_visibility = 0.5;  ///< w_v
  double step_size = 0.05;    ///< eta
  int max_iterations = 300;
  double convergence_tol = 1e-5;      ///< relative objective change
  double metric_regularizer = 1e-6;   ///< epsilon in (R + eps I)
  /// Largest per-iteration coordinate change (m); the covariant step is
  /// scaled down uniformly when it would exceed this.
  double max_step = 0.25;
  /// Sequential flattening sweeps run after every covariant step.
  int flattening_sweeps = 60;
  /// Iterates whose segment angles exceed apex/2 by more than this are
  /// treated as visibility-infeasible when picking the best iterate.
  double visibility_tolerance = 0.2 * std::numbers::pi / 180.0;
  bool visibility = true;
  double apex = std::numbers::pi / 6;
  ObstacleCostParams obstacle;
  MotionModel limits;
  /// Samples held fixed at the start/end of the trajectory.
  std::size_t pinned_head = 1;
  std::size_t pinned_tail = 1;
  int divergence_window = 10;

  void validate() const;
};

/// Sparse R = K^T K for `samples` points, K the second-difference operator
/// (x[i-1] - 2 x[i] + x[i+1]) / dt^2 over interior rows.
Eigen::SparseMatrix<double> control_cost_matrix(std::size_t samples, double dt);

/// Sum over the four pose dimensions of 0.5 * theta^T R theta.
double control_cost(const Trajectory& traj);
double control_cost(const Trajectory& traj, const Eigen::SparseMatrix<double>& R);

struct StateCost {
  double obstacle = 0.0;      ///< c_o (unweighted)
  double acceleration = 0.0;  ///< c_a (unweighted)
  double velocity = 0.0;      ///< c_v (unweighted)
  double total = 0.0;         ///< weighted sum q
  bool clamped = false;       ///< sample was outside the grid
};

/// q at sample i. The obstacle term is evaluated on the signed distance, so
/// samples inside an obstacle keep a gradient pointing out of it. Velocity
/// and acceleration come from central differences and are only defined for
/// interior samples.
StateCost state_cost(const Trajectory& traj, std::size_t i, const DistanceField& field,
                     const OptimizerConfig& config);

struct VisibilityCheck {
  bool violated = false;
  double angle = 0.0;  ///< |atan2(dz, planar)|, radians
};
VisibilityCheck visibility_violation(const Eigen::Vector3d& prev, const Eigen::Vector3d& curr,
                                     double apex);

/// Flattening gradients (g_prev, g_curr = -g_prev) for one segment; zero
/// when the segment is inside the cone. `fallback_azimuth` is used when the
/// segment has no planar extent.
std::pair<Eigen::Vector3d, Eigen::Vector3d> visibility_gradient(const Eigen::Vector3d& prev,
                                                                const Eigen::Vector3d& curr,
                                                                double apex, double w_v,
                                                                double fallback_azimuth = 0.0);

struct Objective {
  double total = 0.0;
  double control = 0.0;
  double state = 0.0;
  double max_angle = 0.0;      ///< largest segment ascent/descent angle (rad)
  double min_clearance = 0.0;  ///< smallest interpolated distance (m)
  bool clamped = false;
};
Objective evaluate(const Trajectory& traj, const DistanceField& field,
                   const OptimizerConfig& config);

/// Analytic gradient of the scalar objective (control + state costs) with
/// respect to every pose coordinate. Visibility is not part of it.
Eigen::MatrixX4d objective_gradient(const Trajectory& traj, const DistanceField& field,
                                    const OptimizerConfig& config);

/// Sum of visibility gradients over every violated segment.
Eigen::MatrixX4d visibility_gradients(const Trajectory& traj, double apex, double w_v);

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double max_angle = 0.0;
  double min_clearance = 0.0;
};

struct OptimizeResult {
  Trajectory trajectory;
  Objective initial;
  Objective best;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  bool clamped = false;
  std::vector<IterationRecord> log;
};

/// Covariant gradient descent on control plus state costs with the
/// visibility flattening force. Pinned samples are returned bit-identical.
/// Throws InfeasibleEndpointError when a pinned endpoint lies in an obstacle.
OptimizeResult optimize(const Trajectory& initial, const DistanceField& field,
                        const OptimizerConfig& config);

void write_iteration_log(std::ostream& os, const std::vector<IterationRecord>& log);

}  // namespace fovtraj
