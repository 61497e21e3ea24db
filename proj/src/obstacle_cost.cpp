#include "fovtraj/obstacle_cost.hpp"

#include "fovtraj/errors.hpp"

#include <string>

namespace fovtraj {

void ObstacleCostParams::validate() const {
  if (!(d_min > 0.0 && d_min < d_safe)) {
    throw ValidationError("obstacle cost requires 0 < d_min < d_safe");
  }
  if (!(o_far > 0.0 && o_far < o_close)) {
    throw ValidationError("obstacle cost requires 0 < o_far < o_close");
  }
}

double obstacle_cost(double distance, const ObstacleCostParams& p) {
  if (!(distance >= 0.0)) {
    throw std::invalid_argument("obstacle_cost: distance must be >= 0, got " +
                                std::to_string(distance));
  }
  if (distance >= p.d_safe) return 0.0;
  if (distance >= p.d_min) return p.o_far * (p.d_safe - distance);
  return p.o_far * (p.d_safe - p.d_min) + p.o_close * (p.d_min - distance);
}

double obstacle_cost_slope(double distance, const ObstacleCostParams& p) {
  if (distance >= p.d_safe) return 0.0;
  if (distance >= p.d_min) return -p.o_far;
  return -p.o_close;
}

}  // namespace fovtraj
