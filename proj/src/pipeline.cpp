#include "fovtraj/pipeline.hpp"

#include <algorithm>

namespace fovtraj {

Trajectory initialize_trajectory(const PlannedPath& path, const PipelineConfig& config) {
  const std::optional<double> apex =
      config.visibility ? std::optional<double>(config.sensor.apex) : std::nullopt;
  std::vector<Pose> smoothed = insert_transition_segments(path.waypoints, config.cost.d_min / 2, apex);
  return enforce_dynamic_limits(time_parameterize(smoothed, config.limits, config.dt), config.limits);
}

OptimizerConfig optimizer_config(const PipelineConfig& config) {
  OptimizerConfig oc = config.optimizer;
  oc.apex = config.sensor.apex;
  oc.limits = config.limits;
  oc.obstacle = config.cost;
  oc.visibility = config.visibility;
  // Two fixed samples per end keep the rest-to-rest boundary velocities.
  oc.pinned_head = std::max<std::size_t>(oc.pinned_head, 2);
  oc.pinned_tail = std::max<std::size_t>(oc.pinned_tail, 2);
  return oc;
}

PipelineResult refine(const PlannedPath& path, const DistanceField& field,
                      const PipelineConfig& config) {
  PipelineResult r;
  r.path = path;
  const std::optional<double> apex =
      config.visibility ? std::optional<double>(config.sensor.apex) : std::nullopt;
  r.smoothed = insert_transition_segments(path.waypoints, config.cost.d_min / 2, apex);
  r.initial = enforce_dynamic_limits(time_parameterize(r.smoothed, config.limits, config.dt),
                                     config.limits);
  r.optimized = optimize(r.initial, field, optimizer_config(config));
  r.trajectory = enforce_dynamic_limits(r.optimized.trajectory, config.limits);
  return r;
}

PipelineResult run_pipeline(const Pose& start, const Pose& goal, const OccupancyGrid& grid,
                            const DistanceField& field, const PipelineConfig& config) {
  PlanConfig pc;
  pc.start = start;
  pc.goal = goal;
  pc.sensor = config.sensor;
  pc.cost = config.cost;
  pc.obstacle_weight = config.obstacle_weight;
  pc.heuristic = config.heuristic;
  pc.visibility_constrained = config.visibility;
  const PlannedPath planned = plan(pc, grid, field);
  return refine(planned, field, config);
}

}  // namespace fovtraj
