#include "doctest.h"

#include "fovtraj/io.hpp"
#include "fovtraj/scene.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fovtraj;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("fovtraj_cli_test_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

const fs::path& workdir() {
  static const TempDir dir;
  return dir.path;
}

std::string in_dir(const std::string& name) { return (workdir() / name).string(); }

// Runs the CLI with stderr captured to `err.txt`; returns the exit code.
int run(const std::string& args) {
  const std::string cmd = std::string(FOVTRAJ_CLI) + " " + args + " 2> " + in_dir("err.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double stat_value(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size() + 1));
}

}  // namespace

TEST_CASE("gen-scene") {
  REQUIRE(run("gen-scene wall --seed 3 --out " + in_dir("w1.yaml")) == 0);
  REQUIRE(run("gen-scene wall --seed 3 --out " + in_dir("w2.yaml")) == 0);
  CHECK(slurp(in_dir("w1.yaml")) == slurp(in_dir("w2.yaml")));
  REQUIRE(run("gen-scene empty --out " + in_dir("empty.yaml")) == 0);
  CHECK(rasterize(read_scene_file(in_dir("empty.yaml"))).occupied_count() == 0);
  REQUIRE(run("gen-scene wall-with-opening --height 4 --out " + in_dir("open.yaml")) == 0);
  const OccupancyGrid g = rasterize(read_scene_file(in_dir("open.yaml")));
  CHECK_FALSE(g.occupied(g.spec().cell_of({18.0, 10.0, 4.0})));
  CHECK(g.occupied(g.spec().cell_of({18.0, 3.0, 4.0})));
  CHECK(run("gen-scene nowhere") == 2);
}

TEST_CASE("plan") {
  REQUIRE(run("gen-scene corridor --out " + in_dir("corr.yaml")) == 0);
  SUBCASE("start equals goal") {
    REQUIRE(run("plan --scene " + in_dir("corr.yaml") + " --start 10.5,12.5,4,0 --goal 10.5,12.5,4,0 --out " +
                in_dir("same.csv")) == 0);
    std::ifstream in(in_dir("same.csv"));
    CHECK(read_path(in).waypoints.size() == 1);
  }
  SUBCASE("straight corridor costs the Euclidean distance and both heuristics agree") {
    REQUIRE(run("plan --scene " + in_dir("corr.yaml") + " --out " + in_dir("fov.csv")) == 0);
    const std::string fov_err = slurp(in_dir("err.txt"));
    REQUIRE(run("plan --scene " + in_dir("corr.yaml") + " --heuristic euclidean --out " + in_dir("euc.csv")) == 0);
    std::ifstream a(in_dir("fov.csv")), b(in_dir("euc.csv"));
    const PlannedPath pa = read_path(a), pb = read_path(b);
    CHECK(pa.cost == doctest::Approx(51.0).epsilon(1e-12));
    CHECK(pb.cost == pa.cost);
    CHECK(stat_value(fov_err, "expansions") == static_cast<double>(pa.expansions));
  }
  SUBCASE("deterministic output") {
    REQUIRE(run("plan --scene " + in_dir("corr.yaml") + " --out " + in_dir("p1.csv")) == 0);
    REQUIRE(run("plan --scene " + in_dir("corr.yaml") + " --out " + in_dir("p2.csv")) == 0);
    CHECK(slurp(in_dir("p1.csv")) == slurp(in_dir("p2.csv")));
  }
  SUBCASE("exit codes") {
    CHECK(run("plan --start 1,1,1,0") == 2);
    CHECK(run("plan --scene " + in_dir("missing.yaml")) == 2);
    CHECK(run("plan --scene " + in_dir("corr.yaml") + " --apex-deg 120") == 2);
    CHECK(run("plan --scene " + in_dir("corr.yaml") + " --start 1,1") == 2);
    REQUIRE(run("gen-scene wall --out " + in_dir("wall_exit.yaml")) == 0);
    CHECK(run("plan --scene " + in_dir("wall_exit.yaml") + " --start 18,10,2,0") == 1);
    CHECK(run("frobnicate") == 2);
  }
}

TEST_CASE("optimize and fly") {
  REQUIRE(run("gen-scene wall --out " + in_dir("wall.yaml")) == 0);
  REQUIRE(run("plan --scene " + in_dir("wall.yaml") + " --out " + in_dir("wall.path.csv")) == 0);
  REQUIRE(run("optimize " + in_dir("wall.path.csv") + " --scene " + in_dir("wall.yaml") + " --out " +
              in_dir("wall.traj.csv")) == 0);
  SUBCASE("angles stay in the band") {
    std::ifstream in(in_dir("wall.traj.angles.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,angle_deg");
    int rows = 0;
    while (std::getline(in, line)) {
      CHECK(std::abs(std::stod(line.substr(line.find(',') + 1))) <= 15.5);
      ++rows;
    }
    CHECK(rows > 10);
    CHECK(fs::exists(in_dir("wall.traj.iterations.csv")));
  }
  SUBCASE("no-visibility run leaves the band") {
    REQUIRE(run("plan --scene " + in_dir("wall.yaml") + " --no-visibility --out " + in_dir("nv.path.csv")) == 0);
    REQUIRE(run("optimize " + in_dir("nv.path.csv") + " --scene " + in_dir("wall.yaml") +
                " --no-visibility --out " + in_dir("nv.traj.csv")) == 0);
    CHECK(stat_value(slurp(in_dir("err.txt")), "max_angle_deg") > 15.0);
  }
  SUBCASE("fly on a known map reveals nothing") {
    REQUIRE(run("fly " + in_dir("wall.traj.csv") + " --scene " + in_dir("wall.yaml") + " --out " +
                in_dir("wall.fly.csv")) == 0);
    const std::string err = slurp(in_dir("err.txt"));
    CHECK(stat_value(err, "map_updates") == 0.0);
    CHECK(stat_value(err, "collision") == 0.0);
    CHECK(slurp(in_dir("wall.fly.csv")).find("#summary") != std::string::npos);
  }
  SUBCASE("empty path is an error") {
    std::ofstream(in_dir("empty.path.csv")) << "x,y,z,yaw,heading\n";
    CHECK(run("optimize " + in_dir("empty.path.csv") + " --scene " + in_dir("wall.yaml")) == 2);
  }
  SUBCASE("deterministic trajectory") {
    REQUIRE(run("optimize " + in_dir("wall.path.csv") + " --scene " + in_dir("wall.yaml") + " --out " +
                in_dir("wall2.traj.csv")) == 0);
    CHECK(slurp(in_dir("wall.traj.csv")) == slurp(in_dir("wall2.traj.csv")));
  }
}

TEST_CASE("replan-sim and bench-heuristic are reproducible") {
  REQUIRE(run("replan-sim --trials 2 --seed 5 --out " + in_dir("r1.csv")) == 0);
  REQUIRE(run("replan-sim --trials 2 --seed 5 --jobs 2 --out " + in_dir("r2.csv")) == 0);
  // Cycle wall times differ between runs; every other column must match.
  auto strip_times = [](const std::string& table) {
    std::istringstream in(table);
    std::string line, out;
    std::getline(in, line);
    out += line + "\n";
    while (std::getline(in, line)) {
      std::vector<std::string> cols;
      std::stringstream ls(line);
      std::string c;
      while (std::getline(ls, c, ',')) cols.push_back(c);
      for (std::size_t i = 0; i < cols.size(); ++i)
        if (i != 10 && i != 11) out += cols[i] + ",";
      out += "\n";
    }
    return out;
  };
  const std::string a = slurp(in_dir("r1.csv"));
  CHECK(a.rfind("trial,cube_x", 0) == 0);
  CHECK(std::count(a.begin(), a.end(), '\n') == 3);
  CHECK(strip_times(a) == strip_times(slurp(in_dir("r2.csv"))));

  REQUIRE(run("gen-scene ascent --out " + in_dir("ascent.yaml")) == 0);
  REQUIRE(run("bench-heuristic --scene " + in_dir("ascent.yaml") + " --out " + in_dir("b1.csv")) == 0);
  CHECK(stat_value(slurp(in_dir("err.txt")), "expansion_ratio") <= 0.5);
  REQUIRE(run("bench-heuristic --scene " + in_dir("ascent.yaml") + " --out " + in_dir("b2.csv")) == 0);
  CHECK(slurp(in_dir("b1.csv")) == slurp(in_dir("b2.csv")));
}
