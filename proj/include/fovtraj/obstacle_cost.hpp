#pragma once

namespace fovtraj {

/// Piecewise-linear clearance penalty. Zero beyond `d_safe`, slope `o_far`
/// between `d_safe` and `d_min`, steeper slope `o_close` inside `d_min`.
struct ObstacleCostParams {
  double d_min = 1.0;   ///< inflated minimum distance (m); also the hard planning clearance
  double d_safe = 3.0;  ///< distance beyond which obstacles cost nothing (m)
  double o_far = 1.0;
  double o_close = 10.0;

  /// Throws ValidationError unless 0 < d_min < d_safe and 0 < o_far < o_close.
  void validate() const;
};

/// Throws std::invalid_argument for negative distances.
double obstacle_cost(double distance, const ObstacleCostParams& params);

/// d(obstacle_cost)/d(distance): 0, -o_far or -o_close. At a breakpoint the
/// slope of the farther piece is returned.
double obstacle_cost_slope(double distance, const ObstacleCostParams& params);

}  // namespace fovtraj
