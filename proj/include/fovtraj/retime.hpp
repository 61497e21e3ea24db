#pragma once

#include "fovtraj/scene.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

namespace fovtraj {

struct MotionModel {
  double v_max = 3.0;                           ///< m/s
  double a_max = 2.0;                           ///< m/s^2
  double yaw_rate_max = std::numbers::pi / 2;  ///< rad/s

  void validate() const;
};

/// Fixed-step 4D trajectory. Row k of each matrix is the sample at time
/// k * dt; columns are x, y, z, yaw (yaw is kept unwrapped).
struct Trajectory {
  double dt = 0.1;
  Eigen::MatrixX4d pose;
  Eigen::MatrixX4d velocity;
  Eigen::MatrixX4d acceleration;

  Trajectory() = default;
  Trajectory(std::size_t samples, double step);

  std::size_t size() const { return static_cast<std::size_t>(pose.rows()); }
  bool empty() const { return pose.rows() == 0; }
  double duration() const { return pose.rows() > 0 ? (pose.rows() - 1) * dt : 0.0; }
  Eigen::Vector3d position(std::size_t k) const { return pose.row(k).head<3>().transpose(); }
};

/// Rest-to-rest speed profile over a distance with bounded speed and
/// acceleration. Triangular when the distance is too short to reach v_max.
class TrapezoidalProfile {
 public:
  TrapezoidalProfile(double distance, double v_max, double a_max);

  double distance() const { return distance_; }
  double duration() const { return duration_; }
  double peak_speed() const { return peak_; }
  bool triangular() const { return cruise_time_ <= 0.0; }

  double position(double t) const;
  double speed(double t) const;
  /// Zero outside (0, duration).
  double acceleration(double t) const;

 private:
  double distance_;
  double a_max_;
  double peak_;
  double ramp_time_;
  double cruise_time_;
  double duration_;
};

/// Replaces every interior corner by samples of a quadratic Bezier blend
/// whose control polygon is (cut point, corner, cut point), with cut points
/// at most `max_deviation` from the corner. Corners adjacent to a
/// zero-length leg (in-place rotations) or collinear legs are kept. When
/// `apex` is given, a blend whose chords would leave the +-apex/2 cone is
/// dropped and the corner kept.
std::vector<Pose> insert_transition_segments(const std::vector<Pose>& path, double max_deviation,
                                             std::optional<double> apex = std::nullopt,
                                             int samples_per_blend = 5);

/// Samples the path at k * dt along a closed-form trapezoidal speed profile
/// over arc length. Zero-translation waypoints become in-place rotations at
/// yaw_rate_max; translation runs between them are each rest-to-rest. The
/// overall duration is rounded up to the dt grid by slowing the profile.
Trajectory time_parameterize(const std::vector<Pose>& path, const MotionModel& model,
                             double dt = 0.1);

/// Overwrites velocity and acceleration with central finite differences of
/// the poses (zero at the first and last sample).
void finite_difference_derivatives(Trajectory& traj);

/// Largest finite-difference speed and acceleration norm over x, y, z.
struct DynamicsExtrema {
  double max_speed = 0.0;
  double max_acceleration = 0.0;
};
DynamicsExtrema dynamics_extrema(const Trajectory& traj);

/// Re-times the sample polyline so its finite-difference speed and
/// acceleration respect the model. Vertex speeds are capped by turn angle
/// and neighbour spacing, propagated forward and backward under an
/// acceleration bound, and tightened locally wherever a resampled point still
/// violates a limit. The spatial path is kept. Returns the input with
/// finite-difference derivatives if it already complies.
Trajectory enforce_dynamic_limits(const Trajectory& traj, const MotionModel& model);

/// Sum of Euclidean distances between consecutive samples.
double arc_length(const Trajectory& traj);
double arc_length(const std::vector<Pose>& path);

}  // namespace fovtraj
