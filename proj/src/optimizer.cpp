#include "fovtraj/optimizer.hpp"

#include "fovtraj/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fovtraj {

namespace {

constexpr double kEps = 1e-12;

double hinge(double value, double limit) { return std::max(0.0, std::abs(value) - limit); }
double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// Obstacle cost over the signed distance: inside obstacles the close slope
// continues linearly with penetration depth.
double signed_obstacle_cost(double d, const ObstacleCostParams& p) {
  return d >= 0 ? obstacle_cost(d, p) : obstacle_cost(0.0, p) - p.o_close * d;
}
double signed_obstacle_slope(double d, const ObstacleCostParams& p) {
  return d >= 0 ? obstacle_cost_slope(d, p) : -p.o_close;
}

bool visibility_ok(const Objective& o, const OptimizerConfig& c) {
  return !c.visibility || o.max_angle <= c.apex / 2 + c.visibility_tolerance;
}

// Strict ordering used to keep the best iterate: visibility-feasible first,
// then lower objective; among infeasible iterates the smaller worst angle.
bool better(const Objective& a, const Objective& b, const OptimizerConfig& c) {
  const bool fa = visibility_ok(a, c), fb = visibility_ok(b, c);
  if (fa != fb) return fa;
  if (fa) return a.total < b.total;
  if (a.max_angle != b.max_angle) return a.max_angle < b.max_angle;
  return a.total < b.total;
}

// One Gauss-Seidel pass of the flattening update (w_v = 1) over violated
// segments. Pinned samples do not move; their share goes to the free end.
void flatten_sweep(Eigen::MatrixX4d& pose, double apex, std::size_t head, std::size_t tail) {
  const Eigen::Index n = pose.rows();
  const Eigen::Index first_free = static_cast<Eigen::Index>(head);
  const Eigen::Index last_free = n - 1 - static_cast<Eigen::Index>(tail);
  double azimuth = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const Eigen::Vector3d prev = pose.row(i - 1).head<3>().transpose();
    const Eigen::Vector3d curr = pose.row(i).head<3>().transpose();
    const Eigen::Vector3d d = curr - prev;
    if (std::hypot(d.x(), d.y()) > kEps) azimuth = std::atan2(d.y(), d.x());
    const auto [g_prev, g_curr] = visibility_gradient(prev, curr, apex, 1.0, azimuth);
    if (g_prev.isZero(0.0)) continue;
    const bool prev_free = i - 1 >= first_free && i - 1 <= last_free;
    const bool curr_free = i >= first_free && i <= last_free;
    if (prev_free && curr_free) {
      pose.row(i - 1).head<3>() -= g_prev.transpose();
      pose.row(i).head<3>() -= g_curr.transpose();
    } else if (prev_free) {
      pose.row(i - 1).head<3>() -= 2.0 * g_prev.transpose();
    } else if (curr_free) {
      pose.row(i).head<3>() -= 2.0 * g_curr.transpose();
    }
  }
}

double max_segment_angle(const Eigen::MatrixX4d& pose) {
  double worst = 0.0;
  for (Eigen::Index i = 1; i < pose.rows(); ++i) {
    const Eigen::Vector3d d = (pose.row(i).head<3>() - pose.row(i - 1).head<3>()).transpose();
    if (d.norm() <= kEps) continue;
    worst = std::max(worst, std::abs(std::atan2(d.z(), std::hypot(d.x(), d.y()))));
  }
  return worst;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(w_obstacle >= 0 && w_acceleration >= 0 && w_velocity >= 0 && w_visibility >= 0)) {
    throw ValidationError("optimizer weights must be nonnegative");
  }
  if (!(step_size > 0)) throw ValidationError("optimizer step size must be positive");
  if (max_iterations < 1) throw ValidationError("optimizer needs at least one iteration");
  if (!(convergence_tol >= 0 && metric_regularizer >= 0 && max_step > 0)) {
    throw ValidationError("optimizer tolerances must be nonnegative");
  }
  if (pinned_head < 1 || pinned_tail < 1) {
    throw ValidationError("at least the first and last samples must be pinned");
  }
  obstacle.validate();
  limits.validate();
}

Eigen::SparseMatrix<double> control_cost_matrix(std::size_t samples, double dt) {
  const auto n = static_cast<Eigen::Index>(samples);
  Eigen::SparseMatrix<double> K(std::max<Eigen::Index>(n - 2, 0), n);
  std::vector<Eigen::Triplet<double>> t;
  const double s = 1.0 / (dt * dt);
  for (Eigen::Index r = 0; r + 2 < n; ++r) {
    t.emplace_back(r, r, s);
    t.emplace_back(r, r + 1, -2 * s);
    t.emplace_back(r, r + 2, s);
  }
  K.setFromTriplets(t.begin(), t.end());
  return Eigen::SparseMatrix<double>(K.transpose() * K);
}

double control_cost(const Trajectory& traj) {
  const Eigen::Index n = traj.pose.rows();
  const double s = 1.0 / (traj.dt * traj.dt);
  double cost = 0.0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    cost += 0.5 * ((traj.pose.row(i - 1) - 2 * traj.pose.row(i) + traj.pose.row(i + 1)) * s)
                      .squaredNorm();
  }
  return cost;
}

double control_cost(const Trajectory& traj, const Eigen::SparseMatrix<double>& R) {
  if (R.rows() != traj.pose.rows() || R.cols() != traj.pose.rows()) {
    throw std::invalid_argument("control cost matrix does not match the trajectory length");
  }
  double cost = 0.0;
  for (int d = 0; d < 4; ++d) {
    const Eigen::VectorXd x = traj.pose.col(d);
    cost += 0.5 * x.dot(R * x);
  }
  return cost;
}

StateCost state_cost(const Trajectory& traj, std::size_t i, const DistanceField& field,
                     const OptimizerConfig& config) {
  StateCost q;
  const auto k = static_cast<Eigen::Index>(i);
  const DistanceField::Sample s = field.sample_signed(traj.position(i));
  q.clamped = s.clamped;
  q.obstacle = signed_obstacle_cost(s.distance, config.obstacle);
  if (k > 0 && k + 1 < traj.pose.rows()) {
    const double dt = traj.dt;
    for (int a = 0; a < 3; ++a) {
      const double v = (traj.pose(k + 1, a) - traj.pose(k - 1, a)) / (2 * dt);
      const double acc = (traj.pose(k + 1, a) - 2 * traj.pose(k, a) + traj.pose(k - 1, a)) / (dt * dt);
      const double hv = hinge(v, config.limits.v_max);
      const double ha = hinge(acc, config.limits.a_max);
      q.velocity += hv * hv;
      q.acceleration += ha * ha;
    }
  }
  q.total = config.w_obstacle * q.obstacle + config.w_acceleration * q.acceleration +
            config.w_velocity * q.velocity;
  return q;
}

VisibilityCheck visibility_violation(const Eigen::Vector3d& prev, const Eigen::Vector3d& curr,
                                     double apex) {
  const Eigen::Vector3d d = curr - prev;
  const double planar = std::hypot(d.x(), d.y());
  VisibilityCheck out;
  if (planar == 0.0 && d.z() == 0.0) return out;
  out.angle = std::abs(std::atan2(d.z(), planar));
  out.violated = out.angle > apex / 2;
  return out;
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> visibility_gradient(const Eigen::Vector3d& prev,
                                                                const Eigen::Vector3d& curr,
                                                                double apex, double w_v,
                                                                double fallback_azimuth) {
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  if (!visibility_violation(prev, curr, apex).violated) return {zero, zero};
  const Eigen::Vector3d d = curr - prev;
  const double planar = std::hypot(d.x(), d.y());
  const double slope = std::tan(apex / 2);
  const double dz = d.z();
  const double max_dz = slope * planar;
  const double excess = std::abs(dz) - max_dz;
  // Planar stretch: the closed-form value, but never less than the length
  // that absorbs the half of the excess not removed in z (the closed form
  // turns negative, i.e. contracting, once excess < max_dz).
  const double stretch = std::max(excess / slope - planar, 0.5 * excess / slope);
  const double alpha = planar > kEps ? std::atan2(d.y(), d.x()) : fallback_azimuth;
  Eigen::Vector3d g_prev(w_v * std::cos(alpha) * stretch / 2, w_v * std::sin(alpha) * stretch / 2,
                         w_v * sign(-dz) * excess / 4);
  return {g_prev, -g_prev};
}

Objective evaluate(const Trajectory& traj, const DistanceField& field,
                   const OptimizerConfig& config) {
  Objective o;
  o.control = control_cost(traj);
  o.min_clearance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const StateCost q = state_cost(traj, i, field, config);
    o.state += q.total;
    o.clamped = o.clamped || q.clamped;
    o.min_clearance = std::min(o.min_clearance, field.sample(traj.position(i)).distance);
  }
  o.total = o.control + o.state;
  o.max_angle = max_segment_angle(traj.pose);
  return o;
}

Eigen::MatrixX4d objective_gradient(const Trajectory& traj, const DistanceField& field,
                                    const OptimizerConfig& config) {
  const Eigen::Index n = traj.pose.rows();
  const double dt = traj.dt;
  const double s = 1.0 / (dt * dt);
  Eigen::MatrixX4d g = Eigen::MatrixX4d::Zero(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const DistanceField::Sample smp =
        field.sample_signed(traj.position(static_cast<std::size_t>(i)));
    const double slope = signed_obstacle_slope(smp.distance, config.obstacle);
    g.row(i).head<3>() += config.w_obstacle * slope * smp.gradient.transpose();
  }
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    // Control cost: R theta = K^T (K theta).
    const Eigen::RowVector4d acc =
        (traj.pose.row(i - 1) - 2 * traj.pose.row(i) + traj.pose.row(i + 1)) * s;
    g.row(i - 1) += acc * s;
    g.row(i) -= 2 * acc * s;
    g.row(i + 1) += acc * s;
    for (int a = 0; a < 3; ++a) {
      const double v = (traj.pose(i + 1, a) - traj.pose(i - 1, a)) / (2 * dt);
      const double hv = hinge(v, config.limits.v_max);
      if (hv > 0) {
        const double dq = config.w_velocity * 2 * hv * sign(v) / (2 * dt);
        g(i + 1, a) += dq;
        g(i - 1, a) -= dq;
      }
      const double ha = hinge(acc[a], config.limits.a_max);
      if (ha > 0) {
        const double dq = config.w_acceleration * 2 * ha * sign(acc[a]) * s;
        g(i - 1, a) += dq;
        g(i, a) -= 2 * dq;
        g(i + 1, a) += dq;
      }
    }
  }
  return g;
}

Eigen::MatrixX4d visibility_gradients(const Trajectory& traj, double apex, double w_v) {
  const Eigen::Index n = traj.pose.rows();
  Eigen::MatrixX4d g = Eigen::MatrixX4d::Zero(n, 4);
  double azimuth = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const Eigen::Vector3d prev = traj.pose.row(i - 1).head<3>().transpose();
    const Eigen::Vector3d curr = traj.pose.row(i).head<3>().transpose();
    const Eigen::Vector3d d = curr - prev;
    if (std::hypot(d.x(), d.y()) > kEps) azimuth = std::atan2(d.y(), d.x());
    const auto [g_prev, g_curr] = visibility_gradient(prev, curr, apex, w_v, azimuth);
    g.row(i - 1).head<3>() += g_prev.transpose();
    g.row(i).head<3>() += g_curr.transpose();
  }
  return g;
}

OptimizeResult optimize(const Trajectory& initial, const DistanceField& field,
                        const OptimizerConfig& config) {
  config.validate();
  OptimizeResult result;
  result.trajectory = initial;
  if (initial.empty()) throw ValidationError("cannot optimize an empty trajectory");

  for (std::size_t k : {std::size_t{0}, initial.size() - 1}) {
    const Eigen::Vector3d p = initial.position(k);
    if (!field.spec().contains(p) || field.at(field.spec().cell_of(p)) <= 0.0) {
      throw InfeasibleEndpointError("trajectory endpoint lies inside an obstacle or outside the map");
    }
  }

  const Eigen::Index n = initial.pose.rows();
  const auto head = static_cast<Eigen::Index>(config.pinned_head);
  const auto tail = static_cast<Eigen::Index>(config.pinned_tail);
  const Eigen::Index free = n - head - tail;

  result.initial = evaluate(initial, field, config);
  result.best = result.initial;
  result.log.push_back({0, result.initial.total, result.initial.max_angle, result.initial.min_clearance});
  if (free <= 0) {
    finite_difference_derivatives(result.trajectory);
    result.converged = true;
    return result;
  }

  const Eigen::SparseMatrix<double> R = control_cost_matrix(static_cast<std::size_t>(n), initial.dt);
  Eigen::SparseMatrix<double> metric = R.block(head, head, free, free);
  for (Eigen::Index i = 0; i < free; ++i) metric.coeffRef(i, i) += config.metric_regularizer;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(metric);
  if (solver.info() != Eigen::Success) throw std::runtime_error("smoothing metric factorization failed");

  Trajectory current = initial;
  Trajectory best = initial;
  Objective current_obj = result.initial;
  double eta = config.step_size;
  const double eta_floor = config.step_size * 1e-6;
  int growth_streak = 0;

  for (int it = 1; it <= config.max_iterations; ++it) {
    result.iterations = it;
    Eigen::MatrixX4d grad = objective_gradient(current, field, config);
    if (config.visibility) grad += visibility_gradients(current, config.apex, config.w_visibility);

    Eigen::MatrixX4d step(free, 4);
    for (int d = 0; d < 4; ++d) {
      const Eigen::VectorXd rhs = grad.col(d).segment(head, free);
      step.col(d) = -eta * solver.solve(rhs);
    }
    if (step.cwiseAbs().maxCoeff() == 0.0 && visibility_ok(current_obj, config)) {
      result.log.push_back({it, current_obj.total, current_obj.max_angle, current_obj.min_clearance});
      result.converged = true;
      break;
    }
    const double largest = step.leftCols<3>().cwiseAbs().maxCoeff();
    if (largest > config.max_step) step.leftCols<3>() *= config.max_step / largest;
    const double largest_yaw = step.col(3).cwiseAbs().maxCoeff();
    if (largest_yaw > config.max_step) step.col(3) *= config.max_step / largest_yaw;

    Trajectory candidate = current;
    candidate.pose.middleRows(head, free) += step;
    if (config.visibility) {
      for (int sweep = 0; sweep < config.flattening_sweeps; ++sweep) {
        if (max_segment_angle(candidate.pose) <= config.apex / 2 + 0.25 * config.visibility_tolerance) break;
        flatten_sweep(candidate.pose, config.apex, config.pinned_head, config.pinned_tail);
      }
    }
    const Objective obj = evaluate(candidate, field, config);
    result.clamped = result.clamped || obj.clamped;

    // Feasible iterates only move to feasible iterates with a lower
    // objective; infeasible ones accept anything that shrinks the violation.
    const bool accept = visibility_ok(current_obj, config)
                            ? visibility_ok(obj, config) && obj.total < current_obj.total
                            : visibility_ok(obj, config) || obj.max_angle < current_obj.max_angle;
    if (!accept) {
      result.log.push_back({it, current_obj.total, current_obj.max_angle, current_obj.min_clearance});
      eta *= 0.5;
      if (eta < eta_floor) {
        result.converged = visibility_ok(current_obj, config);
        break;
      }
      continue;
    }

    const double change =
        std::abs(current_obj.total - obj.total) / std::max(std::abs(current_obj.total), kEps);
    growth_streak = obj.total > current_obj.total ? growth_streak + 1 : 0;
    current = std::move(candidate);
    current_obj = obj;
    eta = std::min(config.step_size, 2 * eta);
    result.log.push_back({it, obj.total, obj.max_angle, obj.min_clearance});
    if (better(obj, result.best, config)) {
      result.best = obj;
      best = current;
    }
    if (growth_streak >= config.divergence_window) {
      result.diverged = true;
      break;
    }
    if (change < config.convergence_tol && visibility_ok(obj, config)) {
      result.converged = true;
      break;
    }
  }

  result.trajectory = best;
  finite_difference_derivatives(result.trajectory);
  return result;
}

void write_iteration_log(std::ostream& os, const std::vector<IterationRecord>& log) {
  os << "iteration,objective,max_angle_deg,min_clearance\n";
  os.precision(9);
  for (const IterationRecord& r : log) {
    os << r.iteration << ',' << r.objective << ',' << r.max_angle * 180.0 / std::numbers::pi << ','
       << r.min_clearance << '\n';
  }
}

}  // namespace fovtraj
