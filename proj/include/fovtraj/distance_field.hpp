#pragma once

#include "fovtraj/grid.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace fovtraj {

/// Metric Euclidean distance from every cell center to the nearest occupied
/// cell center. Immutable once built.
class DistanceField {
 public:
  DistanceField() = default;

  const GridSpec& spec() const { return spec_; }
  std::uint64_t source_revision() const { return source_revision_; }
  /// Value stored for grids without any occupied cell (bounding-box diagonal).
  double sentinel() const { return spec_.diagonal(); }
  bool has_obstacles() const { return has_obstacles_; }

  double at(const CellIndex& c) const { return distance_[spec_.linear(c)]; }
  double at(std::size_t linear_idx) const { return distance_[linear_idx]; }
  const std::vector<double>& raw() const { return distance_; }

  /// Trilinear interpolation between the eight surrounding cell centers.
  /// Throws std::out_of_range naming the axis when `p` is outside the grid box.
  double query(const Eigen::Vector3d& p) const;

  struct Sample {
    double distance = 0.0;
    /// Exact derivative of the trilinear interpolant (zero along clamped axes).
    Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
    /// True when `p` had to be clamped into the grid box.
    bool clamped = false;
  };
  /// Like query() but clamps out-of-bounds points to the boundary and also
  /// returns the interpolant's gradient.
  Sample sample(const Eigen::Vector3d& p) const;
  /// Same interpolation over the signed field: the distance outside
  /// obstacles minus the depth (distance to the nearest free cell center)
  /// inside them.
  Sample sample_signed(const Eigen::Vector3d& p) const;

 private:
  friend DistanceField compute_distance_field(const OccupancyGrid& grid);

  Sample interpolate(const std::vector<double>& values, const Eigen::Vector3d& p) const;

  GridSpec spec_;
  std::vector<double> distance_;
  std::vector<double> signed_;
  std::uint64_t source_revision_ = 0;
  bool has_obstacles_ = false;
};

/// Exact separable squared-distance transform with per-axis metric spacing.
DistanceField compute_distance_field(const OccupancyGrid& grid);

}  // namespace fovtraj
