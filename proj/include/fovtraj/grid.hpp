#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fovtraj {

using CellIndex = Eigen::Vector3i;

/// Geometry of an anisotropic voxel lattice.
///
/// Cells have a square horizontal footprint of `cell_xy` and a height of
/// `cell_z`. Cell (i, j, k) covers
/// [origin + (i, j, k) * size, origin + (i + 1, j + 1, k + 1) * size) and its
/// center sits half a cell inside that box.
struct GridSpec {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  double cell_xy = 1.0;
  double cell_z = 1.0;
  Eigen::Vector3i dims = Eigen::Vector3i::Ones();

  /// Builds a spec whose cell height matches the ascent slope of a sensor
  /// with vertical apex angle `apex` (radians, 0 < apex <= pi/2):
  /// cell_z = tan(apex / 2) * cell_xy.
  static GridSpec for_sensor(const Eigen::Vector3d& origin, double cell_xy,
                             double apex, const Eigen::Vector3i& dims);

  /// Throws ValidationError on non-positive sizes or dims.
  void validate() const;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims.x()) * dims.y() * dims.z();
  }
  Eigen::Vector3d cell_size() const { return {cell_xy, cell_xy, cell_z}; }
  Eigen::Vector3d extent() const { return dims.cast<double>().cwiseProduct(cell_size()); }
  /// Length of the bounding-box diagonal; the distance sentinel for empty grids.
  double diagonal() const { return extent().norm(); }

  bool in_bounds(const CellIndex& c) const {
    return c.x() >= 0 && c.y() >= 0 && c.z() >= 0 && c.x() < dims.x() &&
           c.y() < dims.y() && c.z() < dims.z();
  }
  /// Linear index, x fastest. Throws std::out_of_range for invalid cells.
  std::size_t linear(const CellIndex& c) const;
  std::size_t linear_unchecked(const CellIndex& c) const {
    return static_cast<std::size_t>(c.x()) +
           static_cast<std::size_t>(dims.x()) *
               (static_cast<std::size_t>(c.y()) +
                static_cast<std::size_t>(dims.y()) * static_cast<std::size_t>(c.z()));
  }
  CellIndex unlinear(std::size_t idx) const;

  Eigen::Vector3d center(const CellIndex& c) const {
    return origin + (c.cast<double>() + Eigen::Vector3d::Constant(0.5)).cwiseProduct(cell_size());
  }
  /// Cell containing `p`. Throws std::out_of_range naming the axis when `p`
  /// lies outside the grid box.
  CellIndex cell_of(const Eigen::Vector3d& p) const;
  bool contains(const Eigen::Vector3d& p) const;

  bool operator==(const GridSpec& o) const {
    return origin == o.origin && cell_xy == o.cell_xy && cell_z == o.cell_z && dims == o.dims;
  }
};

/// Boolean occupancy per cell plus a revision counter bumped on every mutation.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  explicit OccupancyGrid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  std::uint64_t revision() const { return revision_; }

  bool occupied(const CellIndex& c) const { return cells_[spec_.linear(c)] != 0; }
  bool occupied(std::size_t linear_idx) const { return cells_.at(linear_idx) != 0; }

  /// Sets one cell. Bumps the revision even when the value is unchanged.
  void set_occupied(const CellIndex& c, bool value = true);
  /// Applies many updates under a single revision bump. Returns the number of
  /// cells whose value actually changed.
  std::size_t set_occupied_many(const std::vector<std::size_t>& linear_cells, bool value = true);

  std::size_t occupied_count() const;
  const std::vector<std::uint8_t>& raw() const { return cells_; }

  /// Equal geometry and occupancy; revisions are not compared.
  bool same_content(const OccupancyGrid& other) const {
    return spec_ == other.spec_ && cells_ == other.cells_;
  }

 private:
  GridSpec spec_;
  std::vector<std::uint8_t> cells_;
  std::uint64_t revision_ = 0;
};

}  // namespace fovtraj
