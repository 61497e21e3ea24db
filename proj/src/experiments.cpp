#include "fovtraj/experiments.hpp"

#include "fovtraj/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <random>
#include <thread>

namespace fovtraj {

Eigen::Vector3d hidden_cube_center(const Scene& scene, const HiddenCubeConfig& config,
                                   std::uint64_t seed, int trial) {
  if (!scene.start || !scene.goal) throw ValidationError("scene needs a start and a goal");
  std::seed_seq seq{seed, static_cast<std::uint64_t>(trial)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Vector3d a = scene.start->position;
  const Eigen::Vector3d b = scene.goal->position;
  const Eigen::Vector3d axis = (b - a).normalized();
  // Two unit vectors orthogonal to the line.
  Eigen::Vector3d u = axis.unitOrthogonal();
  Eigen::Vector3d w = axis.cross(u);
  const double along = config.along_min + (config.along_max - config.along_min) * unit(rng);
  const double radius = config.corridor_radius * std::sqrt(unit(rng));
  const double angle = 2 * std::numbers::pi * unit(rng);
  return a + along * (b - a) + radius * (std::cos(angle) * u + std::sin(angle) * w);
}

TrialOutcome run_hidden_cube_trial(const Scene& scene, const HiddenCubeConfig& config,
                                   const Eigen::Vector3d& cube_center, int trial) {
  TrialOutcome out;
  out.trial = trial;
  out.cube_center = cube_center;

  OccupancyGrid known = rasterize(scene);
  const DistanceField known_field = compute_distance_field(known);
  const PipelineResult initial =
      run_pipeline(*scene.start, *scene.goal, known, known_field, config.pipeline);

  Scene truth_scene = scene;
  const Eigen::Vector3d half = Eigen::Vector3d::Constant(config.cube_size / 2);
  truth_scene.boxes.push_back(Box{cube_center - half, cube_center + half});
  const OccupancyGrid truth = rasterize(truth_scene);

  SimConfig sim = config.sim;
  sim.sensor = config.pipeline.sensor;
  sim.a_max = config.pipeline.limits.a_max;
  if (sim.replan) {
    OptimizerConfig base = optimizer_config(config.pipeline);
    base.max_iterations = sim.replan->optimizer.max_iterations;
    sim.replan->optimizer = base;
  }
  const FlightLog log = simulate(initial.trajectory, truth, known, sim);

  out.collision = log.summary.collision;
  out.min_clearance = log.summary.min_clearance;
  out.clearance_after_reaction = log.clearance_after_reaction;
  out.merged_min_clearance = log.merged_min_clearance;
  out.cycles = log.cycles.size();
  out.failed_cycles = log.failed_cycles;
  for (const CycleRecord& c : log.cycles) {
    out.mean_cycle_ms += 1e3 * c.wall_time;
    out.max_cycle_ms = std::max(out.max_cycle_ms, 1e3 * c.wall_time);
  }
  if (!log.cycles.empty()) out.mean_cycle_ms /= static_cast<double>(log.cycles.size());
  out.first_revelation_time = log.summary.first_revelation_time.value_or(-1.0);
  out.ate_rmse = log.summary.ate_rmse;
  return out;
}

std::vector<TrialOutcome> run_hidden_cube_trials(const Scene& scene, const HiddenCubeConfig& config,
                                                 int trials, std::uint64_t seed, int jobs) {
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(std::max(trials, 0)));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < trials; t = next++) {
      outcomes[static_cast<std::size_t>(t)] =
          run_hidden_cube_trial(scene, config, hidden_cube_center(scene, config, seed, t), t);
    }
  };
  const int threads = std::clamp(jobs, 1, std::max(trials, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  return outcomes;
}

void write_trial_table(std::ostream& os, const std::vector<TrialOutcome>& outcomes) {
  os << std::setprecision(6);
  os << "trial,cube_x,cube_y,cube_z,collision,min_clearance,clearance_after_reaction,"
        "merged_min_clearance,cycles,failed_cycles,mean_cycle_ms,max_cycle_ms,first_revelation_s,"
        "ate_rmse\n";
  for (const TrialOutcome& o : outcomes) {
    os << o.trial << ',' << o.cube_center.x() << ',' << o.cube_center.y() << ','
       << o.cube_center.z() << ',' << (o.collision ? 1 : 0) << ',' << o.min_clearance << ','
       << o.clearance_after_reaction << ',' << o.merged_min_clearance << ',' << o.cycles << ','
       << o.failed_cycles << ',' << o.mean_cycle_ms << ',' << o.max_cycle_ms << ','
       << o.first_revelation_time << ',' << o.ate_rmse << '\n';
  }
}

}  // namespace fovtraj
