#pragma once

#include "fovtraj/distance_field.hpp"
#include "fovtraj/optimizer.hpp"
#include "fovtraj/planner.hpp"
#include "fovtraj/retime.hpp"

namespace fovtraj {

/// Everything needed to go from a start/goal pair to a flyable trajectory.
struct PipelineConfig {
  SensorModel sensor;
  MotionModel limits;
  ObstacleCostParams cost;
  HeuristicKind heuristic = HeuristicKind::fov;
  bool visibility = true;
  double dt = 0.1;
  double obstacle_weight = 1.0;
  OptimizerConfig optimizer;
};

struct PipelineResult {
  PlannedPath path;
  std::vector<Pose> smoothed;
  Trajectory initial;
  OptimizeResult optimized;
  /// Optimized trajectory re-timed to restore the velocity and acceleration
  /// limits.
  Trajectory trajectory;
};

/// Initial trajectory for a planned path: corner blends (deviation d_min/2)
/// followed by closed-form retiming.
Trajectory initialize_trajectory(const PlannedPath& path, const PipelineConfig& config);

/// Optimizer settings derived from the pipeline settings (apex, limits,
/// obstacle costs and the visibility switch).
OptimizerConfig optimizer_config(const PipelineConfig& config);

/// Runs optimize() followed by enforce_dynamic_limits().
PipelineResult refine(const PlannedPath& path, const DistanceField& field,
                      const PipelineConfig& config);

PipelineResult run_pipeline(const Pose& start, const Pose& goal, const OccupancyGrid& grid,
                            const DistanceField& field, const PipelineConfig& config);

}  // namespace fovtraj
