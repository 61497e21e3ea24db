#pragma once

#include "fovtraj/grid.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fovtraj {

/// Position in meters plus yaw in radians.
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;
};

/// Axis-aligned box in meters. May extend beyond the grid.
struct Box {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();
};

/// Declarative world description: grid geometry, obstacle boxes and an
/// optional mission (start/goal) that presets attach for convenience.
struct Scene {
  std::string name;
  GridSpec grid;
  /// Set when the cell height was derived from a sensor apex angle.
  std::optional<double> apex;
  std::vector<Box> boxes;
  std::optional<Pose> start;
  std::optional<Pose> goal;
};

/// Parses the YAML scene format. Throws ParseError (with line and field) on
/// malformed documents and ValidationError on bad geometry.
Scene parse_scene(std::string_view text);
Scene read_scene_file(const std::string& path);

/// Emits the YAML scene format; doubles are written with 17 significant
/// digits so parse_scene(serialize_scene(s)) reproduces `s` exactly.
std::string serialize_scene(const Scene& scene);
void write_scene_file(const Scene& scene, const std::string& path);

/// Marks every cell whose center lies strictly inside any box.
OccupancyGrid rasterize(const Scene& scene);

/// Convenience: rasterize(parse_scene(text)).
OccupancyGrid load_scene(std::string_view text);

/// Describes an occupancy grid as a scene whose boxes are runs of occupied
/// cells along x. rasterize() of the result reproduces the grid.
Scene scene_from_grid(const OccupancyGrid& grid);

}  // namespace fovtraj
