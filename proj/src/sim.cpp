#include "fovtraj/sim.hpp"

#include "fovtraj/distance_field.hpp"
#include "fovtraj/errors.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace fovtraj {

namespace {

double wrap(double a) { return std::remainder(a, 2 * std::numbers::pi); }

}  // namespace

VehicleState follower_step(const VehicleState& state, const Command& command, double dt,
                           const FollowerGains& gains, double a_max) {
  Eigen::Vector3d a = gains.kp * (command.position - state.position) +
                      gains.kd * (command.velocity - state.velocity);
  const double norm = a.norm();
  if (norm > a_max) a *= a_max / norm;
  VehicleState next;
  next.velocity = state.velocity + a * dt;
  next.position = state.position + next.velocity * dt;
  const double rate = std::clamp(gains.yaw_gain * wrap(command.yaw - state.yaw), -gains.yaw_rate_max,
                                 gains.yaw_rate_max);
  next.yaw = state.yaw + rate * dt;
  next.time = state.time + dt;
  return next;
}

std::vector<std::size_t> visible_cells(const OccupancyGrid& truth, const Eigen::Vector3d& position,
                                       double yaw, double range, const SensorModel& sensor) {
  const GridSpec& spec = truth.spec();
  std::vector<std::size_t> out;
  const Eigen::Vector3d size = spec.cell_size();
  CellIndex lo, hi;
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor((position[a] - range - spec.origin[a]) / size[a])));
    hi[a] = std::min(spec.dims[a] - 1,
                     static_cast<int>(std::floor((position[a] + range - spec.origin[a]) / size[a])));
  }
  const double slope = std::tan(sensor.apex / 2);
  for (int z = lo.z(); z <= hi.z(); ++z)
    for (int y = lo.y(); y <= hi.y(); ++y)
      for (int x = lo.x(); x <= hi.x(); ++x) {
        const CellIndex c(x, y, z);
        const std::size_t idx = spec.linear_unchecked(c);
        if (!truth.occupied(idx)) continue;
        const Eigen::Vector3d d = spec.center(c) - position;
        if (d.norm() > range) continue;
        const double planar = std::hypot(d.x(), d.y());
        if (std::abs(d.z()) > slope * planar) continue;
        if (sensor.mode == SensorMode::front_facing &&
            std::abs(wrap(std::atan2(d.y(), d.x()) - yaw)) > sensor.horizontal_fov / 2) {
          continue;
        }
        out.push_back(idx);
      }
  return out;
}

FlightLog simulate(const Trajectory& trajectory, const OccupancyGrid& truth, OccupancyGrid& known,
                   const SimConfig& config) {
  if (trajectory.empty()) throw ValidationError("cannot fly an empty trajectory");
  if (!(truth.spec() == known.spec())) throw ValidationError("known map geometry differs from the scene");
  FlightLog log;
  const double inf = std::numeric_limits<double>::infinity();
  log.merged_min_clearance = inf;
  log.clearance_after_reaction = inf;
  log.summary.min_clearance = inf;

  const DistanceField truth_field = compute_distance_field(truth);
  DistanceField known_field = compute_distance_field(known);
  Trajectory active = trajectory;
  const double dt = trajectory.dt;
  const std::size_t n = trajectory.size();
  const auto cycle_steps =
      static_cast<std::size_t>(std::max(1.0, std::round(config.cycle_time / dt)));

  VehicleState state;
  state.position = trajectory.position(0);
  state.velocity = trajectory.velocity.row(0).head<3>().transpose();
  state.yaw = trajectory.pose(0, 3);

  std::optional<std::size_t> reveal_step;
  std::optional<std::size_t> reaction_step;
  int cycles_after_reveal = 0;
  std::size_t next_cycle = 0;

  for (std::size_t k = 0; k < n; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    std::vector<std::size_t> seen =
        visible_cells(truth, state.position, state.yaw, config.sensor_range, config.sensor);
    std::erase_if(seen, [&](std::size_t idx) { return known.occupied(idx); });
    if (!seen.empty()) {
      known.set_occupied_many(seen, true);
      ++log.summary.map_updates;
      if (!reveal_step) {
        reveal_step = k;
        log.summary.first_revelation_time = static_cast<double>(k) * dt;
      }
    }

    if (config.replan && k >= next_cycle && k + 1 < n) {
      if (known_field.source_revision() != known.revision()) known_field = compute_distance_field(known);
      ExecutionState es;
      es.executed_samples = k;
      es.current_time = static_cast<double>(k) * dt;
      es.last_cycle_duration = config.cycle_time;
      const auto t0 = std::chrono::steady_clock::now();
      CycleRecord rec;
      rec.cycle = static_cast<int>(log.cycles.size());
      try {
        const ReplanResult rr = replan_cycle(es, active, known_field, *config.replan);
        active = rr.merged;
        rec.splice_time = rr.splice_time;
        rec.objective_before = rr.before.total;
        rec.objective_after = rr.accepted ? rr.after.total : rr.before.total;
        rec.accepted = rr.accepted;
      } catch (const std::exception&) {
        ++log.failed_cycles;
      }
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rec.min_clearance = inf;
      for (std::size_t j = k; j < n; ++j) {
        rec.min_clearance = std::min(rec.min_clearance, known_field.sample(active.position(j)).distance);
      }
      log.cycles.push_back(rec);
      if (reveal_step) {
        if (cycles_after_reveal >= 1) log.merged_min_clearance = std::min(log.merged_min_clearance, rec.min_clearance);
        if (cycles_after_reveal == 0) reaction_step = k + cycle_steps;
        ++cycles_after_reveal;
      }
      next_cycle = k + cycle_steps;
    }

    FlightRecord r;
    r.time = static_cast<double>(k) * dt;
    r.commanded = active.position(k);
    r.commanded_yaw = active.pose(row, 3);
    r.position = state.position;
    r.velocity = state.velocity;
    r.yaw = state.yaw;
    r.clearance = truth_field.sample(state.position).distance;
    log.records.push_back(r);
    log.summary.min_clearance = std::min(log.summary.min_clearance, r.clearance);
    log.summary.max_speed = std::max(log.summary.max_speed, r.velocity.norm());
    if (r.clearance < config.vehicle_radius && !log.summary.collision) {
      log.summary.collision = true;
      log.summary.first_collision_step = k;
    }
    if (reaction_step && k >= *reaction_step) {
      log.clearance_after_reaction = std::min(log.clearance_after_reaction, r.clearance);
    }

    Command cmd;
    cmd.position = active.position(k);
    cmd.velocity = active.velocity.row(row).head<3>().transpose();
    cmd.yaw = active.pose(row, 3);
    state = follower_step(state, cmd, dt, config.gains, config.a_max);
  }
  const auto [mean, rmse] = ate(log);
  log.summary.ate_mean = mean;
  log.summary.ate_rmse = rmse;
  log.final_trajectory = active;
  return log;
}

std::pair<double, double> ate(const FlightLog& log) {
  if (log.records.empty()) throw std::invalid_argument("ATE of an empty flight log");
  double sum = 0.0, sq = 0.0;
  for (const FlightRecord& r : log.records) {
    const double e = (r.commanded - r.position).norm();
    sum += e;
    sq += e * e;
  }
  const auto n = static_cast<double>(log.records.size());
  return {sum / n, std::sqrt(sq / n)};
}

void write_flight_log(std::ostream& os, const FlightLog& log) {
  os << std::setprecision(9);
  os << "t,cmd_x,cmd_y,cmd_z,cmd_yaw,x,y,z,vx,vy,vz,yaw,clearance\n";
  for (const FlightRecord& r : log.records) {
    os << r.time << ',' << r.commanded.x() << ',' << r.commanded.y() << ',' << r.commanded.z() << ','
       << r.commanded_yaw << ',' << r.position.x() << ',' << r.position.y() << ','
       << r.position.z() << ',' << r.velocity.x() << ',' << r.velocity.y() << ','
       << r.velocity.z() << ',' << r.yaw << ',' << r.clearance << '\n';
  }
  const FlightSummary& s = log.summary;
  os << "#summary ate_mean=" << s.ate_mean << " ate_rmse=" << s.ate_rmse
     << " max_speed=" << s.max_speed << " min_clearance=" << s.min_clearance
     << " collision=" << (s.collision ? 1 : 0) << " map_updates=" << s.map_updates << '\n';
}

}  // namespace fovtraj
