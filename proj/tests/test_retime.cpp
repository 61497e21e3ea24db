#include "doctest.h"
#include "oracles.hpp"

#include "fovtraj/errors.hpp"
#include "fovtraj/planner.hpp"
#include "fovtraj/retime.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <random>

using namespace fovtraj;

namespace {

constexpr double kApex = std::numbers::pi / 6;

std::vector<Pose> line_path(int n, const Eigen::Vector3d& step) {
  std::vector<Pose> p;
  for (int i = 0; i < n; ++i) p.push_back({i * step, 0.0});
  return p;
}

double max_segment_angle(const Eigen::MatrixX4d& pose) {
  double worst = 0.0;
  for (Eigen::Index k = 1; k < pose.rows(); ++k) {
    const Eigen::Vector3d d = (pose.row(k) - pose.row(k - 1)).head<3>().transpose();
    if (d.norm() < 1e-12) continue;
    worst = std::max(worst, std::atan2(std::abs(d.z()), d.head<2>().norm()));
  }
  return worst;
}

// Random lattice paths from the planner; they satisfy the ascent bound.
std::vector<PlannedPath> random_paths(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const GridSpec spec = GridSpec::for_sensor({0, 0, 0}, 1.0, kApex, {16, 16, 12});
  std::vector<PlannedPath> out;
  while (static_cast<int>(out.size()) < count) {
    const OccupancyGrid g = oracle::random_grid(spec, 0.04, rng);
    const DistanceField f = compute_distance_field(g);
    std::vector<CellIndex> free;
    for (std::size_t i = 0; i < spec.cell_count(); ++i)
      if (f.at(i) >= 1.0) free.push_back(spec.unlinear(i));
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    PlanConfig c;
    c.start.position = spec.center(free[pick(rng)]);
    c.goal.position = spec.center(free[pick(rng)]);
    try {
      PlannedPath p = plan(c, g, f);
      if (p.waypoints.size() >= 3) out.push_back(std::move(p));
    } catch (const NoPathError&) {
    }
  }
  return out;
}

}  // namespace

TEST_CASE("motion model validation") {
  MotionModel m;
  CHECK_NOTHROW(m.validate());
  m.a_max = 0.0;
  CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("transition segments") {
  SUBCASE("straight path unchanged") {
    const auto p = line_path(5, {1, 0, 0});
    const auto q = insert_transition_segments(p, 0.5);
    REQUIRE(q.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(q[i].position == p[i].position);
  }
  SUBCASE("short paths unchanged") {
    const auto p = line_path(2, {1, 1, 0});
    CHECK(insert_transition_segments(p, 0.5).size() == 2);
  }
  SUBCASE("90 deg corner stays near the corner and inside its triangle") {
    const std::vector<Pose> p{{{0, 0, 0}, 0}, {{1, 0, 0}, 0}, {{1, 1, 0}, 0}};
    const auto q = insert_transition_segments(p, 0.25);
    REQUIRE(q.size() > 3);
    const Eigen::Vector3d corner(1, 0, 0), a(0.75, 0, 0), b(1, 0.25, 0);
    for (std::size_t i = 1; i + 1 < q.size(); ++i) {
      const Eigen::Vector3d x = q[i].position;
      CHECK((x - corner).norm() <= 0.25 + 1e-12);
      // Barycentric containment in triangle (a, corner, b).
      Eigen::Matrix2d m;
      m << (corner - a).head<2>(), (b - a).head<2>();
      const Eigen::Vector2d w = m.inverse() * (x - a).head<2>();
      CHECK(w.minCoeff() >= -1e-12);
      CHECK(w.sum() <= 1 + 1e-12);
    }
    CHECK(q.front().position == p.front().position);
    CHECK(q.back().position == p.back().position);
  }
  SUBCASE("endpoints preserved on random paths") {
    for (const auto& path : random_paths(5, 1)) {
      const auto q = insert_transition_segments(path.waypoints, 0.5, kApex);
      CHECK(q.front().position == path.waypoints.front().position);
      CHECK(q.back().position == path.waypoints.back().position);
      CHECK(q.front().yaw == path.waypoints.front().yaw);
    }
  }
}

TEST_CASE("trapezoidal and triangular profiles") {
  const TrapezoidalProfile trap(10.0, 3.0, 2.0);
  CHECK(trap.duration() == doctest::Approx(1.5 + 10.0 / 3.0));
  CHECK_FALSE(trap.triangular());
  CHECK(trap.position(trap.duration()) == doctest::Approx(10.0));
  const TrapezoidalProfile tri(1.0, 3.0, 2.0);
  CHECK(tri.triangular());
  CHECK(tri.peak_speed() == doctest::Approx(std::sqrt(2.0)));
  CHECK(tri.duration() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("time parameterization examples") {
  const MotionModel m;
  SUBCASE("straight 10 m") {
    const Trajectory t = time_parameterize(line_path(11, {1, 0, 0}), m, 0.1);
    CHECK(t.duration() == doctest::Approx(std::ceil(48.3333333 - 1e-9) * 0.1));
    CHECK(t.duration() >= 1.5 + 10.0 / 3.0);
    CHECK(t.velocity.col(0).maxCoeff() <= 3.0 + 1e-9);
    CHECK(t.velocity.col(0).maxCoeff() >= 2.9);
  }
  SUBCASE("straight 1 m is triangular") {
    const Trajectory t = time_parameterize(line_path(2, {1, 0, 0}), m, 0.1);
    CHECK(t.duration() == doctest::Approx(1.5));
    CHECK(t.velocity.col(0).maxCoeff() <= std::sqrt(2.0) + 1e-9);
    CHECK(t.velocity.col(0).maxCoeff() >= 1.2);
  }
  SUBCASE("zero-length path") {
    const Trajectory t = time_parameterize({{{1, 2, 3}, 0.5}}, m, 0.1);
    CHECK(t.size() == 1);
    CHECK(t.duration() == 0.0);
    CHECK(t.velocity.isZero());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(time_parameterize({}, m, 0.1), ValidationError);
    CHECK_THROWS_AS(time_parameterize(line_path(3, {1, 0, 0}), m, 0.0), ValidationError);
  }
  SUBCASE("in-place rotation takes time at the yaw rate limit") {
    std::vector<Pose> p{{{0, 0, 0}, 0}, {{0, 0, 0}, std::numbers::pi}};
    const Trajectory t = time_parameterize(p, m, 0.1);
    CHECK(t.duration() == doctest::Approx(2.0));
    for (Eigen::Index k = 0; k < t.pose.rows(); ++k) CHECK(t.pose.row(k).head<3>().isZero());
    CHECK(t.pose(t.pose.rows() - 1, 3) == doctest::Approx(std::numbers::pi));
  }
}

TEST_CASE("time parameterization invariants on random smoothed paths") {
  const MotionModel m;
  for (const auto& path : random_paths(12, 5)) {
    const auto smoothed = insert_transition_segments(path.waypoints, 0.5, kApex);
    const Trajectory t = time_parameterize(smoothed, m, 0.1);
    const auto n = t.pose.rows();
    CHECK(t.velocity.row(0).isZero());
    CHECK(t.velocity.row(n - 1).isZero());
    CHECK(t.acceleration.row(0).isZero());
    CHECK(t.acceleration.row(n - 1).isZero());
    for (Eigen::Index k = 0; k < n; ++k) {
      CHECK(t.velocity.row(k).head<3>().norm() <= m.v_max + 1e-9);
      CHECK(t.acceleration.row(k).head<3>().norm() <= m.a_max + 1e-9);
      CHECK(std::abs(t.velocity(k, 3)) <= m.yaw_rate_max + 1e-9);
    }
    Trajectory fd = t;
    finite_difference_derivatives(fd);
    for (Eigen::Index k = 1; k + 1 < n; ++k)
      CHECK((fd.velocity.row(k) - t.velocity.row(k)).head<3>().norm() <= 10 * m.a_max * t.dt);
    CHECK(std::abs(arc_length(t) - arc_length(smoothed)) <= 2 * m.v_max * t.dt);
    CHECK(max_segment_angle(t.pose) <= kApex / 2 + 1e-6);
    CHECK(t.pose.row(0).head<3>().transpose() == path.waypoints.front().position);
    CHECK(t.pose.row(n - 1).head<3>().transpose() == path.waypoints.back().position);
  }
}

TEST_CASE("finite differences and dynamics extrema") {
  Trajectory t(5, 0.5);
  for (int k = 0; k < 5; ++k) t.pose(k, 0) = 0.5 * k * k * 0.25;  // x = t^2 / 2
  finite_difference_derivatives(t);
  CHECK(t.velocity(2, 0) == doctest::Approx(1.0));
  CHECK(t.acceleration(2, 0) == doctest::Approx(1.0));
  CHECK(t.velocity.row(0).isZero());
  const DynamicsExtrema e = dynamics_extrema(t);
  CHECK(e.max_acceleration == doctest::Approx(1.0));
  CHECK(e.max_speed == doctest::Approx(1.5));
}

TEST_CASE("enforcing limits keeps the spatial path and endpoints") {
  const MotionModel m;
  for (const auto& path : random_paths(8, 17)) {
    // Corners without blends break the acceleration bound at full speed.
    const Trajectory fast = time_parameterize(path.waypoints, m, 0.1);
    const Trajectory t = enforce_dynamic_limits(fast, m);
    const DynamicsExtrema e = dynamics_extrema(t);
    CHECK(e.max_speed <= m.v_max + 1e-6);
    CHECK(e.max_acceleration <= m.a_max + 1e-6);
    CHECK(t.pose.row(0) == fast.pose.row(0));
    CHECK(t.pose.row(t.pose.rows() - 1) == fast.pose.row(fast.pose.rows() - 1));
    CHECK(std::abs(arc_length(t) - arc_length(fast)) <= 0.05 * arc_length(fast) + 1e-9);
    CHECK(max_segment_angle(t.pose) <= kApex / 2 + 1e-6);
    // Every sample lies on the input polyline.
    for (Eigen::Index k = 0; k < t.pose.rows(); ++k) {
      const Eigen::Vector3d x = t.pose.row(k).head<3>().transpose();
      double best = 1e9;
      for (Eigen::Index j = 1; j < fast.pose.rows(); ++j) {
        const Eigen::Vector3d a = fast.pose.row(j - 1).head<3>().transpose();
        const Eigen::Vector3d b = fast.pose.row(j).head<3>().transpose();
        const double len2 = (b - a).squaredNorm();
        const double u = len2 > 0 ? std::clamp((x - a).dot(b - a) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, (a + u * (b - a) - x).norm());
      }
      CHECK(best <= 1e-9);
    }
  }
  SUBCASE("compliant input comes back unchanged") {
    const Trajectory t = time_parameterize(line_path(11, {1, 0, 0}), m, 0.1);
    const Trajectory u = enforce_dynamic_limits(t, m);
    CHECK(u.pose == t.pose);
  }
}
