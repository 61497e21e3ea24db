#include "fovtraj/grid.hpp"

#include "fovtraj/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fovtraj {

namespace {
constexpr const char* kAxisName[3] = {"x", "y", "z"};
}

GridSpec GridSpec::for_sensor(const Eigen::Vector3d& origin, double cell_xy, double apex,
                              const Eigen::Vector3i& dims) {
  if (!(apex > 0.0) || apex > std::numbers::pi / 2 + 1e-12) {
    throw ValidationError("apex angle must lie in (0, pi/2], got " + std::to_string(apex));
  }
  GridSpec spec;
  spec.origin = origin;
  spec.cell_xy = cell_xy;
  spec.cell_z = std::tan(apex / 2.0) * cell_xy;
  spec.dims = dims;
  spec.validate();
  return spec;
}

void GridSpec::validate() const {
  if (!(cell_xy > 0.0) || !std::isfinite(cell_xy)) {
    throw ValidationError("cell_xy must be positive, got " + std::to_string(cell_xy));
  }
  if (!(cell_z > 0.0) || !std::isfinite(cell_z)) {
    throw ValidationError("cell_z must be positive, got " + std::to_string(cell_z));
  }
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) {
      throw ValidationError(std::string("dims.") + kAxisName[a] + " must be positive, got " +
                            std::to_string(dims[a]));
    }
    if (!std::isfinite(origin[a])) {
      throw ValidationError(std::string("origin.") + kAxisName[a] + " is not finite");
    }
  }
}

std::size_t GridSpec::linear(const CellIndex& c) const {
  for (int a = 0; a < 3; ++a) {
    if (c[a] < 0 || c[a] >= dims[a]) {
      throw std::out_of_range(std::string("cell index out of range on axis ") + kAxisName[a] +
                              ": " + std::to_string(c[a]) + " not in [0, " +
                              std::to_string(dims[a]) + ")");
    }
  }
  return linear_unchecked(c);
}

CellIndex GridSpec::unlinear(std::size_t idx) const {
  const auto nx = static_cast<std::size_t>(dims.x());
  const auto ny = static_cast<std::size_t>(dims.y());
  return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
          static_cast<int>(idx / (nx * ny))};
}

bool GridSpec::contains(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d rel = p - origin;
  const Eigen::Vector3d ext = extent();
  for (int a = 0; a < 3; ++a) {
    if (!(rel[a] >= 0.0 && rel[a] <= ext[a])) return false;
  }
  return true;
}

CellIndex GridSpec::cell_of(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d rel = p - origin;
  const Eigen::Vector3d size = cell_size();
  CellIndex c;
  for (int a = 0; a < 3; ++a) {
    const double ext = dims[a] * size[a];
    if (!(rel[a] >= 0.0 && rel[a] <= ext)) {
      throw std::out_of_range(std::string("point outside grid on axis ") + kAxisName[a] + ": " +
                              std::to_string(p[a]));
    }
    c[a] = std::min(static_cast<int>(std::floor(rel[a] / size[a])), dims[a] - 1);
  }
  return c;
}

OccupancyGrid::OccupancyGrid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  cells_.assign(spec_.cell_count(), 0);
}

void OccupancyGrid::set_occupied(const CellIndex& c, bool value) {
  cells_[spec_.linear(c)] = value ? 1 : 0;
  ++revision_;
}

std::size_t OccupancyGrid::set_occupied_many(const std::vector<std::size_t>& linear_cells,
                                             bool value) {
  std::size_t changed = 0;
  const std::uint8_t v = value ? 1 : 0;
  for (std::size_t idx : linear_cells) {
    auto& cell = cells_.at(idx);
    if (cell != v) {
      cell = v;
      ++changed;
    }
  }
  ++revision_;
  return changed;
}

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

}  // namespace fovtraj
