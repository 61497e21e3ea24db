#include "fovtraj/retime.hpp"

#include <Eigen/Geometry>

#include "fovtraj/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fovtraj {

namespace {

constexpr double kEps = 1e-12;

double chord_angle(const Eigen::Vector3d& d) {
  return std::abs(std::atan2(d.z(), std::hypot(d.x(), d.y())));
}

// One timeline piece: either a rest-to-rest translation along a polyline or
// an in-place yaw rotation at constant rate.
struct Phase {
  double begin = 0.0;
  double duration = 0.0;
  bool rotation = false;
  // Translation data.
  std::vector<Eigen::Vector3d> points;
  std::vector<double> yaws;
  std::vector<double> cumulative;  // arc length at each point
  std::optional<TrapezoidalProfile> profile;
  // Rotation data.
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw_from = 0.0;
  double yaw_to = 0.0;
};

struct PhaseSample {
  Eigen::Vector4d pose = Eigen::Vector4d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d acceleration = Eigen::Vector3d::Zero();
};

PhaseSample sample_phase(const Phase& ph, double u) {
  PhaseSample out;
  if (ph.rotation) {
    const double f = ph.duration > 0 ? std::clamp(u / ph.duration, 0.0, 1.0) : 1.0;
    out.pose << ph.position, ph.yaw_from + f * (ph.yaw_to - ph.yaw_from);
    return out;
  }
  const TrapezoidalProfile& prof = *ph.profile;
  const double s = std::clamp(prof.position(u), 0.0, prof.distance());
  const auto it = std::upper_bound(ph.cumulative.begin(), ph.cumulative.end(), s);
  std::size_t seg = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - ph.cumulative.begin() - 1, 0));
  seg = std::min(seg, ph.points.size() - 2);
  const double len = ph.cumulative[seg + 1] - ph.cumulative[seg];
  const double f = len > kEps ? std::clamp((s - ph.cumulative[seg]) / len, 0.0, 1.0) : 0.0;
  const Eigen::Vector3d tangent =
      len > kEps ? ((ph.points[seg + 1] - ph.points[seg]) / len).eval() : Eigen::Vector3d::Zero();
  out.pose.head<3>() = ph.points[seg] + f * (ph.points[seg + 1] - ph.points[seg]);
  out.pose[3] = ph.yaws[seg] + f * (ph.yaws[seg + 1] - ph.yaws[seg]);
  out.velocity = prof.speed(u) * tangent;
  out.acceleration = prof.acceleration(u) * tangent;
  return out;
}

}  // namespace

void MotionModel::validate() const {
  if (!(v_max > 0 && a_max > 0 && yaw_rate_max > 0)) {
    throw ValidationError("motion model bounds must be strictly positive");
  }
}

Trajectory::Trajectory(std::size_t samples, double step)
    : dt(step),
      pose(Eigen::MatrixX4d::Zero(static_cast<Eigen::Index>(samples), 4)),
      velocity(Eigen::MatrixX4d::Zero(static_cast<Eigen::Index>(samples), 4)),
      acceleration(Eigen::MatrixX4d::Zero(static_cast<Eigen::Index>(samples), 4)) {}

TrapezoidalProfile::TrapezoidalProfile(double distance, double v_max, double a_max)
    : distance_(std::max(distance, 0.0)), a_max_(a_max) {
  if (distance_ >= v_max * v_max / a_max) {
    peak_ = v_max;
    ramp_time_ = v_max / a_max;
    cruise_time_ = (distance_ - v_max * v_max / a_max) / v_max;
  } else {
    peak_ = std::sqrt(a_max * distance_);
    ramp_time_ = peak_ / a_max;
    cruise_time_ = 0.0;
  }
  duration_ = 2 * ramp_time_ + cruise_time_;
}

double TrapezoidalProfile::position(double t) const {
  if (t <= 0) return 0.0;
  if (t >= duration_) return distance_;
  if (t < ramp_time_) return 0.5 * a_max_ * t * t;
  if (t < ramp_time_ + cruise_time_) return 0.5 * peak_ * ramp_time_ + peak_ * (t - ramp_time_);
  const double r = duration_ - t;
  return distance_ - 0.5 * a_max_ * r * r;
}

double TrapezoidalProfile::speed(double t) const {
  if (t <= 0 || t >= duration_) return 0.0;
  if (t < ramp_time_) return a_max_ * t;
  if (t < ramp_time_ + cruise_time_) return peak_;
  return a_max_ * (duration_ - t);
}

double TrapezoidalProfile::acceleration(double t) const {
  if (t <= 0 || t >= duration_) return 0.0;
  if (t < ramp_time_) return a_max_;
  if (t < ramp_time_ + cruise_time_) return 0.0;
  return -a_max_;
}

std::vector<Pose> insert_transition_segments(const std::vector<Pose>& path, double max_deviation,
                                             std::optional<double> apex, int samples_per_blend) {
  if (path.size() < 3 || max_deviation <= 0.0) return path;
  samples_per_blend = std::max(samples_per_blend, 3);
  std::vector<Pose> out;
  out.push_back(path.front());
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    const Pose& a = path[i - 1];
    const Pose& b = path[i];
    const Pose& c = path[i + 1];
    const Eigen::Vector3d u = a.position - b.position;
    const Eigen::Vector3d w = c.position - b.position;
    const double lu = u.norm(), lw = w.norm();
    const bool degenerate = lu < kEps || lw < kEps || u.cross(w).norm() <= 1e-9 * lu * lw;
    if (degenerate) {
      out.push_back(b);
      continue;
    }
    const double s = std::min({max_deviation, 0.5 * lu, 0.5 * lw});
    const Eigen::Vector3d p = b.position + (s / lu) * u;
    const Eigen::Vector3d q = b.position + (s / lw) * w;
    const double yaw_p = b.yaw + (a.yaw - b.yaw) * (s / lu);
    const double yaw_q = b.yaw + (c.yaw - b.yaw) * (s / lw);

    std::vector<Pose> blend;
    for (int j = 0; j < samples_per_blend; ++j) {
      const double t = static_cast<double>(j) / (samples_per_blend - 1);
      const double w0 = (1 - t) * (1 - t), w1 = 2 * t * (1 - t), w2 = t * t;
      blend.push_back({w0 * p + w1 * b.position + w2 * q, w0 * yaw_p + w1 * b.yaw + w2 * yaw_q});
    }
    bool keep = true;
    if (apex) {
      for (std::size_t j = 1; j < blend.size() && keep; ++j) {
        const Eigen::Vector3d d = blend[j].position - blend[j - 1].position;
        if (d.norm() > kEps && chord_angle(d) > *apex / 2 + 1e-9) keep = false;
      }
    }
    if (keep) {
      out.insert(out.end(), blend.begin(), blend.end());
    } else {
      out.push_back(b);
    }
  }
  out.push_back(path.back());
  return out;
}

Trajectory time_parameterize(const std::vector<Pose>& path, const MotionModel& model, double dt) {
  model.validate();
  if (!(dt > 0)) throw ValidationError("time step must be positive");
  if (path.empty()) throw ValidationError("cannot time-parameterize an empty path");

  std::vector<Phase> phases;
  double clock = 0.0;
  auto close_translation = [&](Phase& ph) {
    if (ph.points.size() < 2) return;
    ph.profile.emplace(ph.cumulative.back(), model.v_max, model.a_max);
    ph.begin = clock;
    ph.duration = ph.profile->duration();
    clock += ph.duration;
    phases.push_back(std::move(ph));
  };

  Phase current;
  current.points.push_back(path.front().position);
  current.yaws.push_back(path.front().yaw);
  current.cumulative.push_back(0.0);
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Eigen::Vector3d step = path[i].position - path[i - 1].position;
    const double len = step.norm();
    if (len > kEps) {
      current.points.push_back(path[i].position);
      current.yaws.push_back(path[i].yaw);
      current.cumulative.push_back(current.cumulative.back() + len);
      continue;
    }
    const double dyaw = path[i].yaw - current.yaws.back();
    if (std::abs(dyaw) <= kEps) continue;
    close_translation(current);
    Phase rot;
    rot.rotation = true;
    rot.position = path[i].position;
    rot.yaw_from = path[i - 1].yaw;
    rot.yaw_to = path[i].yaw;
    rot.begin = clock;
    rot.duration = std::abs(dyaw) / model.yaw_rate_max;
    clock += rot.duration;
    phases.push_back(rot);
    current = Phase{};
    current.points.push_back(path[i].position);
    current.yaws.push_back(path[i].yaw);
    current.cumulative.push_back(0.0);
  }
  close_translation(current);

  const double total = clock;
  const auto intervals = static_cast<std::size_t>(std::ceil(total / dt - 1e-9));
  Trajectory traj(intervals + 1, dt);
  if (intervals == 0) {
    traj.pose.row(0) << path.back().position.transpose(), path.back().yaw;
    return traj;
  }
  // Slow the whole timeline so it ends exactly on the dt grid.
  const double r = total / (intervals * dt);

  Eigen::VectorXd yaw_target(intervals + 1);
  std::size_t phase_idx = 0;
  for (std::size_t k = 0; k <= intervals; ++k) {
    const double tau = std::min(k * dt * r, total);
    while (phase_idx + 1 < phases.size() && tau >= phases[phase_idx].begin + phases[phase_idx].duration) {
      ++phase_idx;
    }
    const Phase& ph = phases[phase_idx];
    const PhaseSample s = sample_phase(ph, tau - ph.begin);
    traj.pose.row(k) = s.pose.transpose();
    traj.velocity.row(k).head<3>() = (r * s.velocity).transpose();
    traj.acceleration.row(k).head<3>() = (r * r * s.acceleration).transpose();
    yaw_target[k] = s.pose[3];
  }
  traj.pose.row(intervals) << path.back().position.transpose(), path.back().yaw;
  yaw_target[intervals] = path.back().yaw;

  // Rate-limited yaw tracking of the interpolated yaw.
  const double max_step = model.yaw_rate_max * dt;
  traj.pose(0, 3) = yaw_target[0];
  for (std::size_t k = 1; k <= intervals; ++k) {
    const double prev = traj.pose(k - 1, 3);
    traj.pose(k, 3) = prev + std::clamp(yaw_target[k] - prev, -max_step, max_step);
  }
  for (std::size_t k = 1; k < intervals; ++k) {
    traj.velocity(k, 3) = (traj.pose(k + 1, 3) - traj.pose(k - 1, 3)) / (2 * dt);
    traj.acceleration(k, 3) = (traj.pose(k + 1, 3) - 2 * traj.pose(k, 3) + traj.pose(k - 1, 3)) / (dt * dt);
  }
  traj.velocity.row(0).setZero();
  traj.velocity.row(intervals).setZero();
  traj.acceleration.row(0).setZero();
  traj.acceleration.row(intervals).setZero();
  return traj;
}

void finite_difference_derivatives(Trajectory& traj) {
  const Eigen::Index n = traj.pose.rows();
  traj.velocity = Eigen::MatrixX4d::Zero(n, 4);
  traj.acceleration = Eigen::MatrixX4d::Zero(n, 4);
  const double dt = traj.dt;
  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    traj.velocity.row(k) = (traj.pose.row(k + 1) - traj.pose.row(k - 1)) / (2 * dt);
    traj.acceleration.row(k) =
        (traj.pose.row(k + 1) - 2 * traj.pose.row(k) + traj.pose.row(k - 1)) / (dt * dt);
  }
}

DynamicsExtrema dynamics_extrema(const Trajectory& traj) {
  DynamicsExtrema e;
  const Eigen::Index n = traj.pose.rows();
  const double dt = traj.dt;
  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    const Eigen::RowVector3d v =
        (traj.pose.row(k + 1).head<3>() - traj.pose.row(k - 1).head<3>()) / (2 * dt);
    const Eigen::RowVector3d a = (traj.pose.row(k + 1).head<3>() - 2 * traj.pose.row(k).head<3>() +
                                  traj.pose.row(k - 1).head<3>()) /
                                 (dt * dt);
    e.max_speed = std::max(e.max_speed, v.norm());
    e.max_acceleration = std::max(e.max_acceleration, a.norm());
  }
  return e;
}

Trajectory enforce_dynamic_limits(const Trajectory& traj, const MotionModel& model) {
  model.validate();
  Trajectory fd = traj;
  finite_difference_derivatives(fd);
  const DynamicsExtrema initial = dynamics_extrema(fd);
  if (traj.size() < 3 ||
      (initial.max_speed <= model.v_max && initial.max_acceleration <= model.a_max)) {
    return fd;
  }
  const double dt = traj.dt;

  // Vertices of the sample polyline, exact repeats dropped.
  std::vector<Eigen::Vector4d> pts;
  for (Eigen::Index k = 0; k < traj.pose.rows(); ++k) {
    const Eigen::Vector4d p = traj.pose.row(k).transpose();
    if (pts.empty() || (p - pts.back()).norm() > kEps) pts.push_back(p);
  }
  pts.back() = traj.pose.row(traj.pose.rows() - 1).transpose();
  const std::size_t m = pts.size();
  if (m < 2) return fd;
  std::vector<double> len(m - 1), dyaw(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    len[i] = (pts[i + 1].head<3>() - pts[i].head<3>()).norm();
    dyaw[i] = std::abs(pts[i + 1][3] - pts[i][3]);
  }

  // Curvature speed caps at the vertices; rotations in place force a stop.
  const double a_lat = 0.7 * model.a_max, a_tan = 0.7 * model.a_max;
  std::vector<double> cap(m, model.v_max);
  cap.front() = cap.back() = 0.0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    if (len[i - 1] <= kEps || len[i] <= kEps) {
      cap[i] = 0.0;
      continue;
    }
    const Eigen::Vector3d u = (pts[i].head<3>() - pts[i - 1].head<3>()) / len[i - 1];
    const Eigen::Vector3d w = (pts[i + 1].head<3>() - pts[i].head<3>()) / len[i];
    const double turn = std::atan2(u.cross(w).norm(), u.dot(w));
    if (turn > 1e-9) cap[i] = std::min(cap[i], std::sqrt(a_lat * 0.5 * (len[i - 1] + len[i]) / turn));
  }

  Trajectory out;
  for (int iter = 0; iter < 200; ++iter) {
    // Forward and backward passes under the tangential bound.
    std::vector<double> v = cap;
    for (std::size_t i = 0; i + 1 < m; ++i)
      v[i + 1] = std::min(v[i + 1], std::sqrt(v[i] * v[i] + 2 * a_tan * len[i]));
    for (std::size_t i = m - 1; i > 0; --i)
      v[i - 1] = std::min(v[i - 1], std::sqrt(v[i] * v[i] + 2 * a_tan * len[i - 1]));

    std::vector<double> tau(m - 1), begin(m, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double vs = v[i] + v[i + 1];
      double t = vs > kEps ? 2 * len[i] / vs : 2 * std::sqrt(len[i] / a_tan);
      t = std::max(t, dyaw[i] / model.yaw_rate_max);
      tau[i] = t;
      begin[i + 1] = begin[i] + t;
    }
    const double total = begin.back();
    const auto intervals = static_cast<Eigen::Index>(std::max(1.0, std::ceil(total / dt - 1e-9)));
    const double r = intervals * dt / total;

    out = Trajectory(static_cast<std::size_t>(intervals + 1), dt);
    std::vector<std::size_t> owner(intervals + 1, 0);
    std::size_t seg = 0;
    for (Eigen::Index k = 0; k <= intervals; ++k) {
      const double t = std::min(k * dt / r, total);
      while (seg + 2 < m && t >= begin[seg + 1]) ++seg;
      owner[k] = seg;
      const double u = t - begin[seg];
      double f = 1.0;
      if (len[seg] > kEps) {
        const double acc = (v[seg + 1] - v[seg]) / tau[seg];
        f = std::clamp((v[seg] * u + 0.5 * acc * u * u) / len[seg], 0.0, 1.0);
        if (v[seg] + v[seg + 1] <= kEps) {
          const double h = 0.5 * tau[seg];
          const double a0 = len[seg] / (h * h);
          f = u < h ? 0.5 * a0 * u * u : len[seg] - 0.5 * a0 * (tau[seg] - u) * (tau[seg] - u);
          f = std::clamp(f / len[seg], 0.0, 1.0);
        }
      } else if (tau[seg] > kEps) {
        f = std::clamp(u / tau[seg], 0.0, 1.0);
      }
      out.pose.row(k) = (pts[seg] + f * (pts[seg + 1] - pts[seg])).transpose();
    }
    out.pose.row(0) = traj.pose.row(0);
    out.pose.row(intervals) = traj.pose.row(traj.pose.rows() - 1);
    finite_difference_derivatives(out);

    // Tighten the caps around every sample that still breaks a bound.
    bool ok = true;
    for (Eigen::Index k = 1; k < intervals; ++k) {
      const double speed = out.velocity.row(k).head<3>().norm();
      const double accel = out.acceleration.row(k).head<3>().norm();
      if (speed <= model.v_max && accel <= model.a_max) continue;
      ok = false;
      const double shrink = std::min(0.95, std::sqrt(model.a_max / std::max(accel, kEps)));
      const std::size_t lo = owner[k - 1], hi = std::min(owner[k + 1] + 1, m - 1);
      for (std::size_t i = lo; i <= hi; ++i) cap[i] = std::min(cap[i], shrink * std::max(v[i], 1e-3));
    }
    if (ok) break;
  }
  return out;
}

double arc_length(const Trajectory& traj) {
  double s = 0.0;
  for (Eigen::Index k = 1; k < traj.pose.rows(); ++k) {
    s += (traj.pose.row(k).head<3>() - traj.pose.row(k - 1).head<3>()).norm();
  }
  return s;
}

double arc_length(const std::vector<Pose>& path) {
  double s = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) s += (path[i].position - path[i - 1].position).norm();
  return s;
}

}  // namespace fovtraj
