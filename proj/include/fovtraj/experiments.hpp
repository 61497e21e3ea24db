#pragma once

#include "fovtraj/pipeline.hpp"
#include "fovtraj/scene.hpp"
#include "fovtraj/sim.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

namespace fovtraj {

/// Unknown-obstacle experiment: a cube hidden from the planner is placed with
/// its center inside a corridor around the start-goal line.
struct HiddenCubeConfig {
  double cube_size = 4.0;
  double corridor_radius = 1.0;
  /// Range of the cube center along the start-goal line (fractions).
  double along_min = 0.4;
  double along_max = 0.7;
  PipelineConfig pipeline;
  SimConfig sim = [] {
    SimConfig c;
    c.replan = ReplanConfig{};
    return c;
  }();
};

struct TrialOutcome {
  int trial = 0;
  Eigen::Vector3d cube_center = Eigen::Vector3d::Zero();
  bool collision = false;
  double min_clearance = 0.0;
  double clearance_after_reaction = 0.0;
  double merged_min_clearance = 0.0;
  std::size_t cycles = 0;
  std::size_t failed_cycles = 0;
  double mean_cycle_ms = 0.0;
  double max_cycle_ms = 0.0;
  double first_revelation_time = -1.0;
  double ate_rmse = 0.0;
};

/// Cube center for one trial; depends only on the seed and trial index.
Eigen::Vector3d hidden_cube_center(const Scene& scene, const HiddenCubeConfig& config,
                                   std::uint64_t seed, int trial);

TrialOutcome run_hidden_cube_trial(const Scene& scene, const HiddenCubeConfig& config,
                                   const Eigen::Vector3d& cube_center, int trial = 0);

/// Runs `trials` trials, spread over up to `jobs` threads. Results are in
/// trial order and do not depend on `jobs`.
std::vector<TrialOutcome> run_hidden_cube_trials(const Scene& scene, const HiddenCubeConfig& config,
                                                 int trials, std::uint64_t seed, int jobs = 1);

void write_trial_table(std::ostream& os, const std::vector<TrialOutcome>& outcomes);

}  // namespace fovtraj
