#include "fovtraj/errors.hpp"
#include "fovtraj/experiments.hpp"
#include "fovtraj/io.hpp"
#include "fovtraj/pipeline.hpp"
#include "fovtraj/presets.hpp"
#include "fovtraj/scene.hpp"
#include "fovtraj/sim.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace fovtraj;

namespace {

constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string scene;
  std::string start;
  std::string goal;
  double apex_deg = 30.0;
  double hfov_deg = 360.0;
  std::string mode = "omni";
  std::string heuristic = "fov";
  bool no_visibility = false;
  double vmax = 3.0;
  double amax = 2.0;
  double dt = 0.1;
  int iters = -1;
  std::uint64_t seed = 0;
  int trials = 20;
  int jobs = 1;
  std::string out;
};

double deg(double d) { return d * std::numbers::pi / 180.0; }

Pose parse_pose(const std::string& text, const char* flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
    }
  }
  if (v.size() != 3 && v.size() != 4) throw UsageError(std::string(flag) + " expects x,y,z,yaw");
  return Pose{Eigen::Vector3d(v[0], v[1], v[2]), v.size() == 4 ? v[3] : 0.0};
}

SensorModel sensor_from(const Options& o) {
  SensorModel s;
  s.apex = deg(o.apex_deg);
  s.horizontal_fov = deg(o.hfov_deg);
  s.mode = o.mode == "front" ? SensorMode::front_facing : SensorMode::omnidirectional;
  return s;
}

PipelineConfig pipeline_from(const Options& o) {
  PipelineConfig c;
  c.sensor = sensor_from(o);
  c.limits.v_max = o.vmax;
  c.limits.a_max = o.amax;
  c.dt = o.dt;
  c.visibility = !o.no_visibility;
  c.heuristic = o.heuristic == "euclidean" ? HeuristicKind::euclidean : HeuristicKind::fov;
  if (o.iters > 0) c.optimizer.max_iterations = o.iters;
  return c;
}

Scene load(const Options& o) {
  if (o.scene.empty()) throw UsageError("--scene is required");
  return read_scene_file(o.scene);
}

Pose endpoint(const std::string& flag_value, const std::optional<Pose>& fallback, const char* flag) {
  if (!flag_value.empty()) return parse_pose(flag_value, flag);
  if (fallback) return *fallback;
  throw UsageError(std::string(flag) + " is required (the scene does not define it)");
}

void emit(const Options& o, const std::string& content) {
  if (o.out.empty()) {
    std::cout << content;
  } else {
    write_file(o.out, content);
  }
}

std::string sibling(const std::string& out, const std::string& suffix) {
  const auto dot = out.rfind('.');
  const auto slash = out.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + suffix;
  return out.substr(0, dot) + suffix;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--scene", o.scene, "Scene file (YAML)");
  cmd->add_option("--start", o.start, "Start pose x,y,z,yaw");
  cmd->add_option("--goal", o.goal, "Goal pose x,y,z,yaw");
  cmd->add_option("--apex-deg", o.apex_deg, "Vertical sensor apex angle (deg)")->capture_default_str();
  cmd->add_option("--hfov-deg", o.hfov_deg, "Horizontal field of view (deg)")->capture_default_str();
  cmd->add_option("--mode", o.mode, "Sensor mounting")
      ->check(CLI::IsMember({"omni", "front"}))
      ->capture_default_str();
  cmd->add_option("--heuristic", o.heuristic, "A* heuristic")
      ->check(CLI::IsMember({"fov", "euclidean"}))
      ->capture_default_str();
  cmd->add_flag("--no-visibility", o.no_visibility, "Disable the visibility constraint");
  cmd->add_option("--vmax", o.vmax, "Speed limit (m/s)")->capture_default_str();
  cmd->add_option("--amax", o.amax, "Acceleration limit (m/s^2)")->capture_default_str();
  cmd->add_option("--dt", o.dt, "Trajectory time step (s)")->capture_default_str();
  cmd->add_option("--iters", o.iters, "Optimizer iterations");
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--trials", o.trials, "Number of trials")->capture_default_str();
  cmd->add_option("--jobs", o.jobs, "Parallel trials")->capture_default_str();
  cmd->add_option("--out", o.out, "Output file (stdout when omitted)");
}

PlanConfig plan_config(const Options& o, const Scene& scene) {
  PlanConfig pc;
  pc.start = endpoint(o.start, scene.start, "--start");
  pc.goal = endpoint(o.goal, scene.goal, "--goal");
  pc.sensor = sensor_from(o);
  pc.heuristic = o.heuristic == "euclidean" ? HeuristicKind::euclidean : HeuristicKind::fov;
  pc.visibility_constrained = !o.no_visibility;
  return pc;
}

int cmd_gen_scene(const Options& o, const std::string& preset, std::optional<double> height) {
  PresetParams p;
  p.apex = deg(o.apex_deg);
  p.height = height;
  p.seed = o.seed;
  emit(o, serialize_scene(make_preset(preset, p)));
  return 0;
}

int cmd_plan(const Options& o) {
  const Scene scene = load(o);
  const OccupancyGrid grid = rasterize(scene);
  const DistanceField field = compute_distance_field(grid);
  const PlanConfig pc = plan_config(o, scene);
  const auto t0 = std::chrono::steady_clock::now();
  const PlannedPath path = plan(pc, grid, field);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream os;
  write_path(os, path, PathStats{path.cost, path.expansions});
  emit(o, os.str());
  std::cerr << "cost=" << path.cost << " expansions=" << path.expansions << " wall_ms=" << ms
            << " waypoints=" << path.waypoints.size() << '\n';
  return 0;
}

int cmd_optimize(const Options& o, const std::string& path_file) {
  const Scene scene = load(o);
  std::istringstream in(read_file(path_file));
  const PlannedPath path = read_path(in);
  if (path.waypoints.empty()) throw UsageError("path file " + path_file + " has no waypoints");
  const OccupancyGrid grid = rasterize(scene);
  const DistanceField field = compute_distance_field(grid);
  const PipelineConfig pc = pipeline_from(o);
  const PipelineResult r = refine(path, field, pc);

  std::ostringstream traj, angles, iterations;
  write_trajectory(traj, r.trajectory);
  write_angle_profile(angles, r.trajectory);
  write_iteration_log(iterations, r.optimized.log);
  emit(o, traj.str());
  if (!o.out.empty()) {
    write_file(sibling(o.out, ".angles.csv"), angles.str());
    write_file(sibling(o.out, ".iterations.csv"), iterations.str());
  }
  const DynamicsExtrema e = dynamics_extrema(r.trajectory);
  std::cerr << "iterations=" << r.optimized.iterations << " converged=" << r.optimized.converged
            << " objective=" << r.optimized.best.total
            << " max_angle_deg=" << r.optimized.best.max_angle * 180 / std::numbers::pi
            << " min_clearance=" << r.optimized.best.min_clearance << " duration_s=" << r.trajectory.duration()
            << " max_speed=" << e.max_speed << " max_accel=" << e.max_acceleration << '\n';
  return 0;
}

int cmd_fly(const Options& o, const std::string& traj_file) {
  const Scene scene = load(o);
  std::istringstream in(read_file(traj_file));
  const Trajectory traj = read_trajectory(in);
  const OccupancyGrid truth = rasterize(scene);
  OccupancyGrid known = truth;
  SimConfig sc;
  sc.sensor = sensor_from(o);
  sc.a_max = o.amax;
  const FlightLog log = simulate(traj, truth, known, sc);
  std::ostringstream os;
  write_flight_log(os, log);
  emit(o, os.str());
  const FlightSummary& s = log.summary;
  std::cerr << "ate_mean=" << s.ate_mean << " ate_rmse=" << s.ate_rmse << " max_speed=" << s.max_speed
            << " min_clearance=" << s.min_clearance << " collision=" << s.collision
            << " map_updates=" << s.map_updates << '\n';
  return 0;
}

int cmd_replan_sim(const Options& o, double cube_size) {
  Scene scene = o.scene.empty() ? make_preset("corridor", PresetParams{deg(o.apex_deg), {}, 0}) : load(o);
  if (!o.start.empty()) scene.start = parse_pose(o.start, "--start");
  if (!o.goal.empty()) scene.goal = parse_pose(o.goal, "--goal");
  if (!scene.start || !scene.goal) throw UsageError("replan-sim needs a start and a goal");
  HiddenCubeConfig hc;
  hc.cube_size = cube_size;
  hc.pipeline = pipeline_from(o);
  hc.pipeline.optimizer.max_iterations = OptimizerConfig{}.max_iterations;
  hc.sim.replan->optimizer.max_iterations = o.iters > 0 ? o.iters : 10;
  const auto outcomes = run_hidden_cube_trials(scene, hc, o.trials, o.seed, o.jobs);
  std::ostringstream os;
  write_trial_table(os, outcomes);
  emit(o, os.str());
  int collisions = 0;
  for (const TrialOutcome& t : outcomes) collisions += t.collision ? 1 : 0;
  std::cerr << "trials=" << outcomes.size() << " collisions=" << collisions << '\n';
  return 0;
}

int cmd_bench(const Options& o) {
  const Scene scene = load(o);
  const OccupancyGrid grid = rasterize(scene);
  const DistanceField field = compute_distance_field(grid);
  PlanConfig pc = plan_config(o, scene);
  std::ostringstream os;
  os << "heuristic,cost,expansions\n";
  std::size_t exp[2] = {0, 0};
  int i = 0;
  for (HeuristicKind h : {HeuristicKind::fov, HeuristicKind::euclidean}) {
    pc.heuristic = h;
    const auto t0 = std::chrono::steady_clock::now();
    const PlannedPath p = plan(pc, grid, field);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    const char* name = h == HeuristicKind::fov ? "fov" : "euclidean";
    os << name << ',' << std::setprecision(12) << p.cost << ',' << p.expansions << '\n';
    std::cerr << name << "_wall_ms=" << ms << '\n';
    exp[i++] = p.expansions;
  }
  emit(o, os.str());
  std::cerr << "expansion_ratio=" << static_cast<double>(exp[0]) / static_cast<double>(exp[1]) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visibility-constrained MAV path planning and trajectory optimization"};
  app.require_subcommand(1);
  Options o;

  std::string preset;
  std::optional<double> height;
  auto* gen = app.add_subcommand("gen-scene", "Write a preset scene");
  gen->add_option("preset", preset, "Preset name")->required()->check(CLI::IsMember(preset_names()));
  gen->add_option("--height", height, "Wall, opening or ascent height (m)");
  add_common(gen, o);

  auto* plan_cmd = app.add_subcommand("plan", "Lattice A* path");
  add_common(plan_cmd, o);

  std::string input;
  auto* opt_cmd = app.add_subcommand("optimize", "Retime and optimize a planned path");
  opt_cmd->add_option("path", input, "Path file from `plan`")->required();
  add_common(opt_cmd, o);

  auto* fly_cmd = app.add_subcommand("fly", "Fly a trajectory with the simulated follower");
  fly_cmd->add_option("trajectory", input, "Trajectory file from `optimize`")->required();
  add_common(fly_cmd, o);

  double cube_size = 4.0;
  auto* replan_cmd = app.add_subcommand("replan-sim", "Hidden-cube replanning trials");
  replan_cmd->add_option("--cube-size", cube_size, "Edge length of the hidden cube (m)")->capture_default_str();
  add_common(replan_cmd, o);

  auto* bench_cmd = app.add_subcommand("bench-heuristic", "Compare A* expansions of both heuristics");
  add_common(bench_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (o.dt <= 0 || o.vmax <= 0 || o.amax <= 0) throw UsageError("--dt, --vmax and --amax must be positive");
    if (o.apex_deg <= 0 || o.apex_deg > 90) throw UsageError("--apex-deg must be in (0, 90]");
    if (o.hfov_deg <= 0 || o.hfov_deg > 360) throw UsageError("--hfov-deg must be in (0, 360]");
    if (o.trials < 0 || o.jobs < 1) throw UsageError("--trials must be >= 0 and --jobs >= 1");
    if (*gen) return cmd_gen_scene(o, preset, height);
    if (*plan_cmd) return cmd_plan(o);
    if (*opt_cmd) return cmd_optimize(o, input);
    if (*fly_cmd) return cmd_fly(o, input);
    if (*replan_cmd) return cmd_replan_sim(o, cube_size);
    if (*bench_cmd) return cmd_bench(o);
  } catch (const InfeasibleEndpointError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const NoPathError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
