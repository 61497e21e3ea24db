#include "fovtraj/presets.hpp"

#include "fovtraj/errors.hpp"

#include <cmath>
#include <random>

namespace fovtraj {

namespace {

Box box(double x0, double y0, double z0, double x1, double y1, double z1) {
  return Box{Eigen::Vector3d(x0, y0, z0), Eigen::Vector3d(x1, y1, z1)};
}

Pose pose(double x, double y, double z, double yaw = 0.0) {
  return Pose{Eigen::Vector3d(x, y, z), yaw};
}

Scene base(const std::string& name, const PresetParams& p, int nx, int ny, double height_m) {
  Scene s;
  s.name = name;
  s.apex = p.apex;
  const double cell_z = std::tan(p.apex / 2);
  const int nz = static_cast<int>(std::ceil(height_m / cell_z - 1e-9));
  s.grid = GridSpec::for_sensor(Eigen::Vector3d::Zero(), 1.0, p.apex, Eigen::Vector3i(nx, ny, nz));
  return s;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"empty",    "wall",    "wall-with-opening",
                                              "building", "village", "ascent", "corridor"};
  return names;
}

Scene make_preset(const std::string& name, const PresetParams& p) {
  if (!(p.apex > 0 && p.apex <= std::numbers::pi / 2)) {
    throw ValidationError("apex angle must be in (0, 90] degrees");
  }
  if (name == "empty") {
    Scene s = base(name, p, 20, 20, p.height.value_or(10.0));
    s.start = pose(3.5, 10.5, 1.0);
    s.goal = pose(16.5, 10.5, 1.0);
    return s;
  }
  if (name == "wall") {
    const double h = p.height.value_or(4.0);
    require(h > 0 && h <= 10, "wall height must be in (0, 10] m");
    Scene s = base(name, p, 36, 20, h + 4.0);
    s.boxes.push_back(box(17, -1, -1, 19, 21, h));
    s.start = pose(5.5, 10.5, 1.0);
    s.goal = pose(30.5, 10.5, 1.0);
    return s;
  }
  if (name == "wall-with-opening") {
    const double h = p.height.value_or(4.0);
    require(h >= 2.5 && h <= 8, "opening height must be in [2.5, 8] m");
    const double top = h + 4.0;
    Scene s = base(name, p, 36, 20, top);
    // Wall spanning the full grid with a 4 m wide, 3 m tall window centered at h.
    s.boxes.push_back(box(17, -1, -1, 19, 8, top + 1));
    s.boxes.push_back(box(17, 12, -1, 19, 21, top + 1));
    s.boxes.push_back(box(17, 8, -1, 19, 12, h - 1.5));
    s.boxes.push_back(box(17, 8, h + 1.5, 19, 12, top + 1));
    s.start = pose(5.5, 10.5, 1.0);
    s.goal = pose(30.5, 10.5, 1.0);
    return s;
  }
  if (name == "building") {
    const double h = p.height.value_or(6.0);
    require(h > 0 && h <= 10, "building height must be in (0, 10] m");
    Scene s = base(name, p, 40, 20, h + 4.0);
    s.boxes.push_back(box(15, -1, -1, 25, 21, h));
    s.start = pose(3.5, 10.5, 1.0);
    s.goal = pose(36.5, 10.5, 1.0);
    return s;
  }
  if (name == "village") {
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    auto h = [&](double nominal) { return nominal + jitter(rng); };
    Scene s = base(name, p, 60, 40, 12.0);
    // L-shaped building next to the start.
    const double l_height = h(7.0);
    s.boxes.push_back(box(8, 14, -1, 14, 27, l_height));
    s.boxes.push_back(box(8, 14, -1, 20, 19, l_height));
    s.boxes.push_back(box(24, 8, -1, 32, 17, h(5.0)));
    s.boxes.push_back(box(24, 24, -1, 31, 33, h(8.0)));
    // Building with a taller rear part and a lower cut-in.
    const double main = h(6.0);
    s.boxes.push_back(box(36, 15, -1, 44, 27, main - 2.0));
    s.boxes.push_back(box(36, 15, -1, 39, 27, main));
    s.boxes.push_back(box(41, 15, -1, 44, 27, main));
    s.boxes.push_back(box(48, 6, -1, 54, 13, h(4.0)));
    s.boxes.push_back(box(47, 30, -1, 53, 36, h(5.0)));
    s.start = pose(5.5, 20.5, 1.0);
    s.goal = pose(56.5, 21.5, 1.0);
    return s;
  }
  if (name == "ascent") {
    const double h = p.height.value_or(7.0);
    require(h > 0 && h <= 30, "ascent height must be in (0, 30] m");
    const double cell_z = std::tan(p.apex / 2);
    // Start at the center of the third layer; the goal sits a whole number of
    // layers above it.
    const double z0 = 2.5 * cell_z;
    const double layers = std::round(h / cell_z);
    const double top = z0 + layers * cell_z;
    Scene s = base(name, p, 40, 40, std::max(top + 3 * cell_z, 20 * cell_z));
    s.start = pose(20.5, 20.5, z0);
    s.goal = pose(20.5, 20.5, top);
    return s;
  }
  if (name == "corridor") {
    const double h = p.height.value_or(4.0);
    require(h >= 1 && h <= 8, "corridor flight height must be in [1, 8] m");
    Scene s = base(name, p, 60, 24, h + 6.0);
    s.start = pose(4.5, 12.5, h);
    s.goal = pose(55.5, 12.5, h);
    return s;
  }
  throw ValidationError("unknown preset '" + name + "'");
}

}  // namespace fovtraj
