#include "fovtraj/scene.hpp"

#include "fovtraj/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fovtraj {

namespace {

std::string where(const YAML::Node& node, const std::string& field) {
  const YAML::Mark m = node.Mark();
  std::ostringstream os;
  os << "field '" << field << "'";
  if (!m.is_null()) os << " (line " << m.line + 1 << ", column " << m.column + 1 << ")";
  return os.str();
}

YAML::Node require(const YAML::Node& parent, const char* key, const std::string& path) {
  YAML::Node child = parent[key];
  if (!child) {
    throw ParseError("missing " + where(parent, path.empty() ? key : path + "." + key));
  }
  return child;
}

double as_double(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    throw ParseError("expected a number for " + where(node, path));
  }
}

int as_int(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<int>();
  } catch (const YAML::Exception&) {
    throw ParseError("expected an integer for " + where(node, path));
  }
}

template <int N>
Eigen::Matrix<double, N, 1> as_vec(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence() || node.size() != N) {
    throw ParseError("expected a list of " + std::to_string(N) + " numbers for " +
                     where(node, path));
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    v[i] = as_double(node[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Pose as_pose(const YAML::Node& node, const std::string& path) {
  const Eigen::Vector4d v = as_vec<4>(node, path);
  return Pose{v.head<3>(), v[3]};
}

void write_vec(std::ostream& os, const double* v, int n) {
  os << '[';
  for (int i = 0; i < n; ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << ']';
}

}  // namespace

Scene parse_scene(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(std::string("malformed scene document: ") + e.what());
  }
  if (!root.IsMap()) throw ParseError("scene document must be a mapping at top level");

  Scene scene;
  if (root["name"]) scene.name = root["name"].as<std::string>();

  const YAML::Node grid = require(root, "grid", "");
  scene.grid.origin = grid["origin"] ? as_vec<3>(grid["origin"], "grid.origin")
                                     : Eigen::Vector3d::Zero();
  scene.grid.cell_xy = as_double(require(grid, "cell_xy", "grid"), "grid.cell_xy");
  const YAML::Node dims = require(grid, "dims", "grid");
  if (!dims.IsSequence() || dims.size() != 3) {
    throw ParseError("expected a list of 3 integers for " + where(dims, "grid.dims"));
  }
  for (int a = 0; a < 3; ++a) {
    scene.grid.dims[a] = as_int(dims[a], "grid.dims[" + std::to_string(a) + "]");
  }
  if (grid["apex"]) {
    const double apex = as_double(grid["apex"], "grid.apex");
    scene.apex = apex;
    if (grid["cell_z"]) {
      scene.grid.cell_z = as_double(grid["cell_z"], "grid.cell_z");
      const double expected = std::tan(apex / 2.0) * scene.grid.cell_xy;
      if (std::abs(scene.grid.cell_z - expected) > 1e-9 * expected) {
        throw ValidationError("grid.cell_z does not match tan(apex/2) * cell_xy");
      }
    } else {
      scene.grid = GridSpec::for_sensor(scene.grid.origin, scene.grid.cell_xy, apex,
                                        scene.grid.dims);
    }
  } else {
    scene.grid.cell_z = as_double(require(grid, "cell_z", "grid"), "grid.cell_z");
  }
  scene.grid.validate();

  if (const YAML::Node boxes = root["boxes"]) {
    if (!boxes.IsSequence()) throw ParseError("expected a list for " + where(boxes, "boxes"));
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const std::string path = "boxes[" + std::to_string(i) + "]";
      const YAML::Node b = boxes[i];
      if (!b.IsMap()) throw ParseError("expected a mapping for " + where(b, path));
      Box box{as_vec<3>(require(b, "min", path), path + ".min"),
              as_vec<3>(require(b, "max", path), path + ".max")};
      for (int a = 0; a < 3; ++a) {
        if (!(box.min[a] <= box.max[a])) {
          throw ValidationError(path + ": min exceeds max on axis " + std::to_string(a));
        }
      }
      scene.boxes.push_back(box);
    }
  }
  if (root["start"]) scene.start = as_pose(root["start"], "start");
  if (root["goal"]) scene.goal = as_pose(root["goal"], "goal");
  return scene;
}

Scene read_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scene file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

std::string serialize_scene(const Scene& scene) {
  std::ostringstream os;
  os << std::setprecision(17);
  if (!scene.name.empty()) os << "name: " << scene.name << '\n';
  os << "grid:\n  origin: ";
  write_vec(os, scene.grid.origin.data(), 3);
  os << "\n  cell_xy: " << scene.grid.cell_xy << '\n';
  if (scene.apex) os << "  apex: " << *scene.apex << '\n';
  os << "  cell_z: " << scene.grid.cell_z << '\n';
  os << "  dims: [" << scene.grid.dims.x() << ", " << scene.grid.dims.y() << ", "
     << scene.grid.dims.z() << "]\n";
  for (const auto& [key, pose] : {std::pair{"start", scene.start}, std::pair{"goal", scene.goal}}) {
    if (!pose) continue;
    const Eigen::Vector4d v(pose->position.x(), pose->position.y(), pose->position.z(),
                            pose->yaw);
    os << key << ": ";
    write_vec(os, v.data(), 4);
    os << '\n';
  }
  if (scene.boxes.empty()) {
    os << "boxes: []\n";
  } else {
    os << "boxes:\n";
    for (const Box& b : scene.boxes) {
      os << "  - min: ";
      write_vec(os, b.min.data(), 3);
      os << "\n    max: ";
      write_vec(os, b.max.data(), 3);
      os << '\n';
    }
  }
  return os.str();
}

void write_scene_file(const Scene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene file '" + path + "'");
  out << serialize_scene(scene);
}

OccupancyGrid rasterize(const Scene& scene) {
  OccupancyGrid grid(scene.grid);
  const GridSpec& spec = scene.grid;
  const Eigen::Vector3d size = spec.cell_size();
  std::vector<std::size_t> cells;
  for (const Box& box : scene.boxes) {
    Eigen::Vector3i lo, hi;
    for (int a = 0; a < 3; ++a) {
      // Candidate index range; the exact strict test below decides.
      const double l = (box.min[a] - spec.origin[a]) / size[a] - 0.5;
      const double h = (box.max[a] - spec.origin[a]) / size[a] - 0.5;
      lo[a] = std::max(0, static_cast<int>(std::floor(std::max(l, -1.0))));
      hi[a] = std::min(spec.dims[a] - 1, static_cast<int>(std::ceil(std::min(h, 1e9))));
    }
    for (int k = lo.z(); k <= hi.z(); ++k) {
      for (int j = lo.y(); j <= hi.y(); ++j) {
        for (int i = lo.x(); i <= hi.x(); ++i) {
          const CellIndex c(i, j, k);
          const Eigen::Vector3d p = spec.center(c);
          if ((p.array() > box.min.array()).all() && (p.array() < box.max.array()).all()) {
            cells.push_back(spec.linear_unchecked(c));
          }
        }
      }
    }
  }
  if (!cells.empty()) grid.set_occupied_many(cells);
  return grid;
}

OccupancyGrid load_scene(std::string_view text) { return rasterize(parse_scene(text)); }

Scene scene_from_grid(const OccupancyGrid& grid) {
  Scene scene;
  scene.grid = grid.spec();
  const GridSpec& spec = grid.spec();
  const Eigen::Vector3d size = spec.cell_size();
  for (int k = 0; k < spec.dims.z(); ++k) {
    for (int j = 0; j < spec.dims.y(); ++j) {
      int i = 0;
      while (i < spec.dims.x()) {
        if (!grid.occupied(spec.linear_unchecked({i, j, k}))) {
          ++i;
          continue;
        }
        const int run_start = i;
        while (i < spec.dims.x() && grid.occupied(spec.linear_unchecked({i, j, k}))) ++i;
        Box box;
        box.min = spec.origin + Eigen::Vector3d(run_start, j, k).cwiseProduct(size);
        box.max = spec.origin + Eigen::Vector3d(i, j + 1, k + 1).cwiseProduct(size);
        scene.boxes.push_back(box);
      }
    }
  }
  return scene;
}

}  // namespace fovtraj
