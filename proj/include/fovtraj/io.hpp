#pragma once

#include "fovtraj/planner.hpp"
#include "fovtraj/retime.hpp"

#include <iosfwd>
#include <string>

namespace fovtraj {

/// Search statistics stored next to a path.
struct PathStats {
  double cost = 0.0;
  std::size_t expansions = 0;
};

/// CSV with header `x,y,z,yaw,heading` and a leading `#meta` comment line.
void write_path(std::ostream& os, const PlannedPath& path, const PathStats& stats);
/// Reads write_path() output. Throws ParseError with the offending line.
PlannedPath read_path(std::istream& is);

/// CSV `t,x,y,z,yaw,vx,vy,vz,yaw_rate,ax,ay,az`, 9 significant digits.
void write_trajectory(std::ostream& os, const Trajectory& traj);
/// Reads write_trajectory() output; dt is taken from the time column.
Trajectory read_trajectory(std::istream& is);

/// CSV `t,angle_deg`: ascent angle of the segment ending at each sample.
void write_angle_profile(std::ostream& os, const Trajectory& traj);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace fovtraj
