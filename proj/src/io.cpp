#include "fovtraj/io.hpp"

#include "fovtraj/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <vector>

namespace fovtraj {

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t expected, int line_no) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
    }
  }
  if (out.size() != expected) {
    throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                     " fields, found " + std::to_string(out.size()));
  }
  return out;
}

}  // namespace

void write_path(std::ostream& os, const PlannedPath& path, const PathStats& stats) {
  os << std::setprecision(17);
  os << "#meta cost=" << stats.cost << " expansions=" << stats.expansions << '\n';
  os << "x,y,z,yaw,heading\n";
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    const Pose& p = path.waypoints[i];
    const int heading = i < path.headings.size() ? path.headings[i] : kNoHeading;
    os << p.position.x() << ',' << p.position.y() << ',' << p.position.z() << ',' << p.yaw << ','
       << heading << '\n';
  }
}

PlannedPath read_path(std::istream& is) {
  PlannedPath path;
  std::string line;
  int line_no = 0;
  bool header = false;
  std::vector<int> headings;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line.rfind("#meta", 0) == 0) {
      std::istringstream ss(line.substr(5));
      std::string kv;
      while (ss >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        if (kv.substr(0, eq) == "cost") path.cost = std::stod(kv.substr(eq + 1));
        if (kv.substr(0, eq) == "expansions") path.expansions = std::stoull(kv.substr(eq + 1));
      }
      continue;
    }
    if (line[0] == '#') continue;
    if (!header) {
      if (line.rfind("x,y,z,yaw", 0) != 0) {
        throw ParseError("line " + std::to_string(line_no) + ": missing path header");
      }
      header = true;
      continue;
    }
    const std::vector<double> v = parse_row(line, 5, line_no);
    path.waypoints.push_back(Pose{Eigen::Vector3d(v[0], v[1], v[2]), v[3]});
    headings.push_back(static_cast<int>(v[4]));
  }
  if (!path.waypoints.empty()) {
    headings.pop_back();
    path.headings = headings;
  }
  return path;
}

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  os << std::setprecision(9);
  os << "t,x,y,z,yaw,vx,vy,vz,yaw_rate,ax,ay,az\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    os << static_cast<double>(k) * traj.dt;
    for (int d = 0; d < 4; ++d) os << ',' << traj.pose(i, d);
    for (int d = 0; d < 4; ++d) os << ',' << traj.velocity(i, d);
    for (int d = 0; d < 3; ++d) os << ',' << traj.acceleration(i, d);
    os << '\n';
  }
}

Trajectory read_trajectory(std::istream& is) {
  std::string line;
  int line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    if (line.rfind("t,", 0) == 0) continue;
    rows.push_back(parse_row(line, 12, line_no));
  }
  if (rows.empty()) throw ParseError("trajectory file has no samples");
  const double dt = rows.size() > 1 ? rows[1][0] - rows[0][0] : 0.1;
  if (!(dt > 0)) throw ParseError("trajectory time column must increase");
  Trajectory traj(rows.size(), dt);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    for (int d = 0; d < 4; ++d) traj.pose(i, d) = rows[k][1 + d];
    for (int d = 0; d < 4; ++d) traj.velocity(i, d) = rows[k][5 + d];
    for (int d = 0; d < 3; ++d) traj.acceleration(i, d) = rows[k][9 + d];
  }
  // The file stores times with limited precision; snap dt to the value the
  // whole time column agrees with.
  if (rows.size() > 1) traj.dt = (rows.back()[0] - rows.front()[0]) / static_cast<double>(rows.size() - 1);
  traj.dt = std::round(traj.dt * 1e6) / 1e6;
  return traj;
}

void write_angle_profile(std::ostream& os, const Trajectory& traj) {
  os << std::setprecision(9);
  os << "t,angle_deg\n";
  for (Eigen::Index k = 1; k < traj.pose.rows(); ++k) {
    const Eigen::Vector3d d = (traj.pose.row(k) - traj.pose.row(k - 1)).head<3>().transpose();
    const double angle = d.norm() > 0 ? std::atan2(d.z(), std::hypot(d.x(), d.y())) : 0.0;
    os << static_cast<double>(k) * traj.dt << ',' << angle * 180.0 / std::numbers::pi << '\n';
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fovtraj
