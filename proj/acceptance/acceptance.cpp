// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include "oracles.hpp"

#include "fovtraj/errors.hpp"
#include "fovtraj/experiments.hpp"
#include "fovtraj/pipeline.hpp"
#include "fovtraj/presets.hpp"
#include "fovtraj/scene.hpp"
#include "fovtraj/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace fovtraj;

namespace {

constexpr double kApex = std::numbers::pi / 6;
constexpr double kBandSlack = 0.5 * std::numbers::pi / 180.0;

double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Verdict {
  bool pass = false;
  std::string detail;
};

template <typename... Args>
std::string format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double max_segment_angle(const Trajectory& t) {
  double worst = 0.0;
  for (Eigen::Index k = 1; k < t.pose.rows(); ++k) {
    const Eigen::Vector3d d = (t.pose.row(k) - t.pose.row(k - 1)).head<3>().transpose();
    if (d.norm() == 0.0) continue;
    worst = std::max(worst, std::atan2(std::abs(d.z()), d.head<2>().norm()));
  }
  return worst;
}

double planar_arc(const Trajectory& t) {
  double s = 0.0;
  for (Eigen::Index k = 1; k < t.pose.rows(); ++k) s += (t.pose.row(k) - t.pose.row(k - 1)).head<2>().norm();
  return s;
}

// ---------------------------------------------------------------------------
// Scenario runs shared between criteria.

struct ScenarioRun {
  Scene scene;
  OccupancyGrid grid;
  DistanceField field;
  PipelineResult result;
  double seconds = 0.0;
};

Scene scenario(const std::string& name) {
  if (name == "spiral") {
    PresetParams p;
    p.height = 7.0;
    return make_preset("ascent", p);
  }
  return make_preset(name);
}

ScenarioRun run_scenario(const std::string& name, bool visibility) {
  ScenarioRun r{scenario(name), OccupancyGrid(), DistanceField(), {}, 0.0};
  const Stopwatch sw;
  r.grid = rasterize(r.scene);
  r.field = compute_distance_field(r.grid);
  PipelineConfig pc;
  pc.sensor.apex = r.scene.apex.value_or(kApex);
  pc.visibility = visibility;
  r.result = run_pipeline(*r.scene.start, *r.scene.goal, r.grid, r.field, pc);
  r.seconds = sw.seconds();
  return r;
}

const ScenarioRun& cached(const std::string& name, bool visibility = true) {
  static std::map<std::pair<std::string, bool>, ScenarioRun> cache;
  const auto key = std::make_pair(name, visibility);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, run_scenario(name, visibility)).first;
  return it->second;
}

// ---------------------------------------------------------------------------
// Random lattice instances for criteria 1 and 2.

struct Instance {
  OccupancyGrid grid;
  DistanceField field;
  CellIndex start;
  CellIndex goal;
};

const std::vector<Instance>& random_instances() {
  static const std::vector<Instance> instances = [] {
    std::vector<Instance> out;
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> nxy(4, 12), nz(3, 8);
    std::uniform_real_distribution<double> occupancy(0.0, 0.2);
    while (out.size() < 50) {
      const GridSpec spec = GridSpec::for_sensor({0, 0, 0}, 1.0, kApex, {nxy(rng), nxy(rng), nz(rng)});
      OccupancyGrid g = oracle::random_grid(spec, occupancy(rng), rng);
      DistanceField f = compute_distance_field(g);
      std::vector<CellIndex> free;
      for (std::size_t i = 0; i < spec.cell_count(); ++i)
        if (f.at(i) >= ObstacleCostParams{}.d_min) free.push_back(spec.unlinear(i));
      if (free.size() < 2) continue;
      std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
      const CellIndex a = free[pick(rng)];
      const CellIndex b = free[pick(rng)];
      out.push_back({std::move(g), std::move(f), a, b});
    }
    return out;
  }();
  return instances;
}

Verdict admissibility() {
  const Stopwatch sw;
  std::size_t checked = 0, violations = 0;
  for (const Instance& inst : random_instances()) {
    const GridSpec& spec = inst.grid.spec();
    const oracle::Lattice lattice{&inst.field, {}, 1.0};
    const std::vector<double> to_go = oracle::cost_to_go(lattice, inst.goal);
    for (std::size_t s = 0; s < to_go.size(); ++s) {
      if (std::isinf(to_go[s])) continue;
      const Eigen::Vector3d d = spec.center(spec.unlinear(s / 9)) - spec.center(inst.goal);
      ++checked;
      if (fov_heuristic(d, kApex, spec.cell_xy, spec.cell_z) > to_go[s] + 1e-9) ++violations;
    }
  }
  const double t = sw.seconds();
  return {violations == 0 && checked > 0 && t < 60.0,
          format("%zu reachable states on 50 grids, %zu violations, %.2f s", checked, violations, t)};
}

Verdict optimality() {
  int solved = 0, unreachable = 0, mismatches = 0;
  double worst = 0.0;
  for (const Instance& inst : random_instances()) {
    const GridSpec& spec = inst.grid.spec();
    const double ref = oracle::dijkstra_cost({&inst.field, {}, 1.0}, inst.start, inst.goal);
    PlanConfig c;
    c.start.position = spec.center(inst.start);
    c.goal.position = spec.center(inst.goal);
    try {
      const double cost = plan(c, inst.grid, inst.field).cost;
      ++solved;
      const double err = std::abs(cost - ref);
      worst = std::max(worst, std::isfinite(err) ? err : 1e300);
      if (!(err <= 1e-9)) ++mismatches;
    } catch (const NoPathError&) {
      ++unreachable;
      if (std::isfinite(ref)) ++mismatches;
    }
  }
  return {mismatches == 0 && solved > 0,
          format("%d solved, %d unreachable, %d mismatches, max |A* - Dijkstra| = %.3g", solved, unreachable,
                 mismatches, worst)};
}

Verdict expansion_ratio() {
  const Stopwatch sw;
  auto ratio = [](const Scene& scene) {
    const OccupancyGrid g = rasterize(scene);
    const DistanceField f = compute_distance_field(g);
    PlanConfig c;
    c.start = *scene.start;
    c.goal = *scene.goal;
    c.sensor.apex = scene.apex.value_or(kApex);
    const double fov = static_cast<double>(plan(c, g, f).expansions);
    c.heuristic = HeuristicKind::euclidean;
    return fov / static_cast<double>(plan(c, g, f).expansions);
  };
  PresetParams ascent;
  ascent.height = 7 * std::tan(kApex / 2);
  const Scene in_place = make_preset("ascent", ascent);
  const double main_ratio = ratio(in_place);
  bool ok = main_ratio <= 0.5 && in_place.grid.dims == CellIndex(40, 40, 20);
  std::string others;
  for (const std::string name : {"spiral", "empty", "wall", "wall-with-opening", "building", "village", "corridor"}) {
    const double r = ratio(scenario(name));
    ok = ok && r <= 1.0;
    others += format(" %s=%.3f", name.c_str(), r);
  }
  const double t = sw.seconds();
  ok = ok && t < 30.0;
  return {ok, format("ascent 7 layers ratio %.3f;", main_ratio) + others + format("; %.2f s", t)};
}

Verdict visibility_band() {
  bool ok = true;
  std::string detail;
  for (const std::string name : {"spiral", "wall", "wall-with-opening", "village"}) {
    const double a = max_segment_angle(cached(name).result.trajectory);
    ok = ok && a <= kApex / 2 + kBandSlack;
    detail += format("%s %.2f deg, ", name.c_str(), rad2deg(a));
  }
  const double unconstrained = max_segment_angle(cached("village", false).result.trajectory);
  ok = ok && unconstrained > kApex / 2;
  return {ok, detail + format("village without visibility %.2f deg (band %.1f deg)", rad2deg(unconstrained),
                              rad2deg(kApex / 2 + kBandSlack))};
}

Verdict spiral() {
  const ScenarioRun& r = cached("spiral");
  const double height = r.scene.goal->position.z() - r.scene.start->position.z();
  const double planar = planar_arc(r.result.trajectory);
  const double need = 0.95 * std::max(height, 7.0) / std::tan(kApex / 2);
  return {planar >= need && r.seconds < 10.0,
          format("H = %.3f m, planar arc %.2f m (need %.2f), pipeline %.2f s", height, planar, need, r.seconds)};
}

Verdict flattening() {
  const Eigen::Vector3d p(0, 0, 0), q(1, 0, 1);
  const double d_max = std::tan(kApex / 2) * (q - p).head<2>().norm();
  const double before = std::abs(q.z() - p.z()) - d_max;
  const auto [gp, gq] = visibility_gradient(p, q, kApex, 1.0);
  const Eigen::Vector3d p1 = p - gp, q1 = q - gq;
  const double after = std::abs(q1.z() - p1.z()) - d_max;
  const bool ok = std::abs(before - 0.732051) <= 1e-6 && std::abs(after - 0.366025) <= 1e-6 &&
                  std::abs(after - 0.5 * before) <= 1e-9;
  return {ok, format("violation %.9f -> %.9f, |after - before/2| = %.2g", before, after, std::abs(after - 0.5 * before))};
}

Trajectory random_trajectory(std::mt19937_64& rng, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  constexpr int n = 50;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::Vector3d a = lo + (hi - lo).cwiseProduct(Eigen::Vector3d(u(rng), u(rng), u(rng)) * 0.3);
  const Eigen::Vector3d b = hi - (hi - lo).cwiseProduct(Eigen::Vector3d(u(rng), u(rng), u(rng)) * 0.3);
  Trajectory t(n, 0.1);
  for (int k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) / (n - 1);
    t.pose.row(k).head<3>() = ((1 - s) * a + s * b).transpose();
  }
  for (int axis = 0; axis < 4; ++axis) {
    const double amp = (axis < 3 ? 0.1 * (hi - lo)[axis] : 1.0) * u(rng);
    const double freq = 1 + 3 * u(rng), phase = 2 * std::numbers::pi * u(rng);
    for (int k = 0; k < n; ++k) t.pose(k, axis) += amp * std::sin(freq * std::numbers::pi * k / (n - 1) + phase);
  }
  for (int k = 0; k < n; ++k)
    for (int axis = 0; axis < 3; ++axis) t.pose(k, axis) = std::clamp(t.pose(k, axis), lo[axis] + 0.1, hi[axis] - 0.1);
  finite_difference_derivatives(t);
  return t;
}

Verdict gradients() {
  OccupancyGrid g(GridSpec::for_sensor({0, 0, 0}, 1.0, kApex, {20, 20, 40}));
  std::vector<std::size_t> cells;
  for (int x = 8; x < 12; ++x)
    for (int y = 8; y < 12; ++y)
      for (int z = 0; z < 20; ++z) cells.push_back(g.spec().linear({x, y, z}));
  g.set_occupied_many(cells);
  const DistanceField f = compute_distance_field(g);

  struct Term {
    const char* name;
    double wo, wa, wv;
  };
  const Term terms[] = {{"control", 0, 0, 0}, {"obstacle", 10, 0, 0}, {"acceleration", 0, 1, 0}, {"velocity", 0, 0, 1}};
  std::mt19937_64 rng(77);
  std::string detail;
  bool ok = true;
  for (const Term& term : terms) {
    OptimizerConfig cfg;
    cfg.w_obstacle = term.wo;
    cfg.w_acceleration = term.wa;
    cfg.w_velocity = term.wv;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Trajectory t = random_trajectory(rng, Eigen::Vector3d::Zero(), g.spec().extent());
      const Eigen::MatrixX4d analytic = objective_gradient(t, f, cfg);
      const Eigen::MatrixX4d numeric =
          oracle::numeric_gradient(t, [&](const Trajectory& x) { return evaluate(x, f, cfg).total; });
      worst = std::max(worst, (analytic - numeric).norm() / std::max(numeric.norm(), 1.0));
    }
    ok = ok && worst < 1e-4;
    detail += format("%s %.2g ", term.name, worst);
  }
  return {ok, "max relative error over 20 trajectories: " + detail};
}

Verdict dynamic_limits() {
  const MotionModel limits;
  double vmax = 0.0, amax = 0.0;
  for (const std::string name : {"spiral", "wall", "wall-with-opening", "village"}) {
    const PipelineResult& r = cached(name).result;
    for (const Trajectory* t : {&r.initial, &r.trajectory}) {
      const DynamicsExtrema e = dynamics_extrema(*t);
      vmax = std::max(vmax, e.max_speed);
      amax = std::max(amax, e.max_acceleration);
    }
  }
  const double village = dynamics_extrema(cached("village").result.trajectory).max_speed;
  const bool ok = vmax <= limits.v_max + 1e-6 && amax <= limits.a_max + 1e-6 && village <= 3.0;
  return {ok, format("max speed %.4f m/s, max acceleration %.4f m/s^2, village max speed %.3f m/s", vmax, amax,
                     village)};
}

Verdict replanning() {
  const Scene scene = make_preset("corridor");
  HiddenCubeConfig hc;
  hc.sim.replan->optimizer.max_iterations = 10;
  const Stopwatch sw;
  const std::vector<TrialOutcome> outcomes = run_hidden_cube_trials(scene, hc, 20, 0, 1);
  int collisions = 0;
  double after = 1e300, max_ms = 0.0, mean_ms = 0.0;
  for (const TrialOutcome& o : outcomes) {
    collisions += o.collision ? 1 : 0;
    after = std::min(after, o.clearance_after_reaction);
    max_ms = std::max(max_ms, o.max_cycle_ms);
    mean_ms += o.mean_cycle_ms / static_cast<double>(outcomes.size());
  }
  const double d_min = hc.pipeline.cost.d_min;
  const bool ok = outcomes.size() == 20 && collisions == 0 && after >= d_min && max_ms < 1000.0;
  return {ok, format("%zu trials, %d collisions, min clearance after reaction %.2f m, cycle mean %.0f ms max %.0f ms, "
                     "%.1f s",
                     outcomes.size(), collisions, after, mean_ms, max_ms, sw.seconds())};
}

Verdict tracking() {
  const ScenarioRun& r = cached("village");
  OccupancyGrid known = r.grid;
  const FlightLog log = simulate(r.result.trajectory, r.grid, known, SimConfig{});

  auto offset_log = [](double offset, int n) {
    FlightLog l;
    for (int i = 0; i < n; ++i) {
      FlightRecord rec;
      rec.time = 0.1 * i;
      rec.commanded = Eigen::Vector3d(i, 1.0, 2.0);
      rec.position = rec.commanded + Eigen::Vector3d(0.0, offset, 0.0);
      l.records.push_back(rec);
    }
    return l;
  };
  const auto [m0, r0] = ate(offset_log(0.0, 16));
  const auto [m1, r1] = ate(offset_log(0.25, 16));
  const bool identities = m0 == 0.0 && r0 == 0.0 && m1 == 0.25 && r1 == 0.25;
  const bool ok = identities && log.summary.ate_rmse <= 0.5 && !log.summary.collision;
  return {ok, format("village ATE mean %.3f m, RMSE %.3f m, identities %s", log.summary.ate_mean,
                     log.summary.ate_rmse, identities ? "exact" : "broken")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {"heuristic admissibility", admissibility},
      {"A* optimality", optimality},
      {"expansion reduction", expansion_ratio},
      {"visibility band", visibility_band},
      {"spiral emergence", spiral},
      {"flattening halves the violation", flattening},
      {"gradient checks", gradients},
      {"dynamic feasibility", dynamic_limits},
      {"replanning safety", replanning},
      {"tracking error", tracking},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
