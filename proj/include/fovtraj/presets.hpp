#pragma once

#include "fovtraj/scene.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fovtraj {

struct PresetParams {
  double apex = 0.5235987755982988;  // 30 deg
  /// Preset-specific height (m): wall height, opening center height or
  /// ascent altitude. Each preset has its own default.
  std::optional<double> height;
  std::uint64_t seed = 0;
};

/// Names accepted by make_preset().
const std::vector<std::string>& preset_names();

/// Builds one of the built-in scenes, including start and goal poses.
/// Throws ValidationError for unknown names or heights that do not fit.
Scene make_preset(const std::string& name, const PresetParams& params = {});

}  // namespace fovtraj
