#include "fovtraj/replan.hpp"

#include "fovtraj/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <iomanip>

namespace fovtraj {

namespace {

// Detour initializations for a suffix that still violates the clearance:
// the samples around the deepest penetration are shifted sideways or
// vertically by the smallest probed offset that reaches d_min + margin,
// with raised-cosine ramps so the pinned samples stay untouched.
std::vector<Trajectory> detour_candidates(const Trajectory& suffix, const DistanceField& field,
                                          const OptimizerConfig& oc) {
  std::vector<Trajectory> out;
  const Eigen::Index n = suffix.pose.rows();
  const auto head = static_cast<Eigen::Index>(oc.pinned_head);
  const auto tail = static_cast<Eigen::Index>(oc.pinned_tail);
  if (n - head - tail < 3) return out;

  Eigen::Index deepest = head;
  double worst = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = head; j < n - tail; ++j) {
    const double d = field.sample_signed(suffix.position(static_cast<std::size_t>(j))).distance;
    if (d < worst) {
      worst = d;
      deepest = j;
    }
  }
  if (worst >= oc.obstacle.d_min) return out;

  // Span of samples inside the obstacle's influence around the deepest one.
  auto near = [&](Eigen::Index j) {
    return field.sample_signed(suffix.position(static_cast<std::size_t>(j))).distance < oc.obstacle.d_safe;
  };
  Eigen::Index lo = deepest, hi = deepest;
  while (lo > head && near(lo - 1)) --lo;
  while (hi < n - tail - 1 && near(hi + 1)) ++hi;

  const Eigen::Vector3d p = suffix.position(static_cast<std::size_t>(deepest));
  Eigen::Vector3d along = suffix.position(static_cast<std::size_t>(std::min(deepest + 1, n - 1))) -
                          suffix.position(static_cast<std::size_t>(std::max<Eigen::Index>(deepest - 1, 0)));
  along.z() = 0;
  if (along.norm() < 1e-9) along = Eigen::Vector3d::UnitX();
  along.normalize();
  const Eigen::Vector3d left(-along.y(), along.x(), 0.0);
  const double step_len = std::max(1e-3, (suffix.pose.row(std::min(deepest + 1, n - 1)).head<3>() -
                                          suffix.pose.row(std::max<Eigen::Index>(deepest - 1, 0)).head<3>())
                                                 .norm() / 2);
  const double target = oc.obstacle.d_min + 0.5;

  const std::pair<Eigen::Vector3d, double> directions[] = {
      {left, 0.5}, {-left, 0.5}, {Eigen::Vector3d::UnitZ(), 0.8 * std::tan(oc.apex / 2)},
      {-Eigen::Vector3d::UnitZ(), 0.8 * std::tan(oc.apex / 2)}};
  for (const auto& [dir, slope] : directions) {
    double shift = 0.0;
    for (double a = 0.25; a <= 15.0; a += 0.25) {
      const Eigen::Vector3d q = p + a * dir;
      if (!field.spec().contains(q)) break;
      if (field.sample_signed(q).distance >= target) {
        shift = a;
        break;
      }
    }
    if (shift == 0.0) continue;
    const auto ramp = static_cast<Eigen::Index>(
        std::ceil(shift * std::numbers::pi / (2 * slope * step_len)));
    Trajectory cand = suffix;
    for (Eigen::Index j = head; j < n - tail; ++j) {
      double w = 1.0;
      if (j < lo) w = j <= lo - ramp ? 0.0 : 0.5 * (1 - std::cos(std::numbers::pi * (j - (lo - ramp)) / ramp));
      if (j > hi) w = j >= hi + ramp ? 0.0 : 0.5 * (1 - std::cos(std::numbers::pi * ((hi + ramp) - j) / ramp));
      cand.pose.row(j).head<3>() += (w * shift * dir).transpose();
    }
    out.push_back(std::move(cand));
  }
  return out;
}

bool clear(const Objective& o, const OptimizerConfig& oc) {
  return o.min_clearance >= oc.obstacle.d_min &&
         (!oc.visibility || o.max_angle <= oc.apex / 2 + oc.visibility_tolerance);
}

}  // namespace

std::size_t splice_index(const ExecutionState& state, double dt, double overhead) {
  const double t_s = state.current_time + overhead * state.last_cycle_duration;
  return static_cast<std::size_t>(std::max(0.0, std::ceil(t_s / dt - 1e-9)));
}

ReplanResult replan_cycle(const ExecutionState& state, const Trajectory& trajectory,
                          const DistanceField& field, const ReplanConfig& config) {
  if (state.last_cycle_duration < 0) throw ValidationError("cycle duration must be nonnegative");
  ReplanResult r;
  r.merged = trajectory;
  const std::size_t n = trajectory.size();
  const std::size_t ks = splice_index(state, trajectory.dt, config.overhead);
  r.splice_index = ks;
  r.splice_time = static_cast<double>(ks) * trajectory.dt;
  // Three samples stay fixed around the splice and two at the goal, so at
  // least one sample must remain free.
  if (n == 0 || ks == 0 || ks + 5 > n) return r;
  r.spliced = true;

  const Eigen::Vector3d goal = trajectory.position(n - 1);
  if (!field.spec().contains(goal) ||
      field.query(goal) < config.optimizer.obstacle.d_min - 1e-9) {
    throw InfeasibleEndpointError("goal is within the minimum obstacle distance");
  }

  const std::size_t first = ks - 1;
  Trajectory suffix(n - first, trajectory.dt);
  suffix.pose = trajectory.pose.bottomRows(static_cast<Eigen::Index>(n - first));
  finite_difference_derivatives(suffix);

  OptimizerConfig oc = config.optimizer;
  oc.pinned_head = 3;
  oc.pinned_tail = std::max<std::size_t>(oc.pinned_tail, 2);
  OptimizeResult opt = optimize(suffix, field, oc);
  r.before = opt.initial;
  r.iterations = opt.iterations;
  if (opt.best.min_clearance < oc.obstacle.d_min) {
    for (const Trajectory& cand : detour_candidates(opt.trajectory, field, oc)) {
      OptimizeResult alt = optimize(cand, field, oc);
      r.iterations += alt.iterations;
      const bool alt_clear = clear(alt.best, oc), cur_clear = clear(opt.best, oc);
      const bool better = alt_clear != cur_clear
                              ? alt_clear
                              : (alt_clear ? alt.best.total < opt.best.total
                                           : alt.best.min_clearance > opt.best.min_clearance);
      if (better) opt = std::move(alt);
    }
  }
  r.after = opt.best;

  const double apex_limit = oc.apex / 2 + oc.visibility_tolerance;
  const bool objective_better =
      r.after.total < r.before.total - config.min_improvement * std::abs(r.before.total);
  const bool clearance_better = r.before.min_clearance < oc.obstacle.d_min &&
                                r.after.min_clearance > r.before.min_clearance;
  const bool visibility_better =
      oc.visibility && r.before.max_angle > apex_limit && r.after.max_angle < r.before.max_angle;
  r.accepted = objective_better || clearance_better || visibility_better;
  if (r.accepted) {
    const auto rows = static_cast<Eigen::Index>(n - ks - 2);
    r.merged.pose.bottomRows(rows) = opt.trajectory.pose.bottomRows(rows);
    finite_difference_derivatives(r.merged);
    // Keep the stored derivatives up to the splice sample untouched.
    const auto keep = static_cast<Eigen::Index>(ks + 1);
    r.merged.velocity.topRows(keep) = trajectory.velocity.topRows(keep);
    r.merged.acceleration.topRows(keep) = trajectory.acceleration.topRows(keep);
  }
  return r;
}

void write_cycle_log(std::ostream& os, const std::vector<CycleRecord>& log) {
  os << std::setprecision(9);
  os << "cycle,wall_time,splice_time,objective_before,objective_after,min_clearance,accepted\n";
  for (const CycleRecord& c : log) {
    os << c.cycle << ',' << c.wall_time << ',' << c.splice_time << ',' << c.objective_before << ','
       << c.objective_after << ',' << c.min_clearance << ',' << (c.accepted ? 1 : 0) << '\n';
  }
}

}  // namespace fovtraj
