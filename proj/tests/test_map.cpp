#include "doctest.h"
#include "oracles.hpp"

#include "fovtraj/distance_field.hpp"
#include "fovtraj/errors.hpp"
#include "fovtraj/obstacle_cost.hpp"
#include "fovtraj/presets.hpp"
#include "fovtraj/scene.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fovtraj;

namespace {

GridSpec unit_spec(int nx, int ny, int nz, double cz = 1.0) {
  GridSpec s;
  s.cell_xy = 1.0;
  s.cell_z = cz;
  s.dims = {nx, ny, nz};
  return s;
}

Scene scene_with(const GridSpec& spec, std::vector<Box> boxes) {
  Scene s;
  s.name = "t";
  s.grid = spec;
  s.boxes = std::move(boxes);
  return s;
}

}  // namespace

TEST_CASE("sensor grid uses the ascent slope as cell height") {
  const double apex = std::numbers::pi / 6;
  const GridSpec s = GridSpec::for_sensor({0, 0, 0}, 0.8, apex, {4, 4, 4});
  CHECK(std::abs(s.cell_z - std::tan(apex / 2) * 0.8) <= 1e-9 * s.cell_z);
}

TEST_CASE("grid rejects out-of-bounds cells and invalid geometry") {
  OccupancyGrid g(unit_spec(4, 4, 4));
  CHECK_THROWS_AS(g.occupied(CellIndex(4, 0, 0)), std::out_of_range);
  CHECK_THROWS_AS(g.occupied(CellIndex(-1, 0, 0)), std::out_of_range);
  CHECK_THROWS_AS(g.spec().cell_of({0.5, 0.5, 4.5}), std::out_of_range);
  GridSpec bad = unit_spec(0, 4, 4);
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = unit_spec(4, 4, 4, -1.0);
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("revision increases on every mutation") {
  OccupancyGrid g(unit_spec(3, 3, 3));
  auto r = g.revision();
  g.set_occupied({1, 1, 1});
  CHECK(g.revision() > r);
  r = g.revision();
  g.set_occupied({1, 1, 1});
  CHECK(g.revision() > r);
  r = g.revision();
  g.set_occupied_many({0, 1, 2});
  CHECK(g.revision() > r);
}

TEST_CASE("load_scene examples") {
  SUBCASE("empty box list") {
    const OccupancyGrid g = rasterize(scene_with(unit_spec(4, 4, 4), {}));
    CHECK(g.occupied_count() == 0);
  }
  SUBCASE("box covering the grid") {
    const OccupancyGrid g = rasterize(scene_with(unit_spec(4, 4, 4), {{{-1, -1, -1}, {5, 5, 5}}}));
    CHECK(g.occupied_count() == 64);
  }
  SUBCASE("partial box agrees with a point-in-box scan") {
    const GridSpec spec = unit_spec(4, 4, 4);
    const Box box{{1, 1, 0}, {3, 3, 1}};
    const OccupancyGrid g = rasterize(scene_with(spec, {box}));
    std::size_t expected = 0;
    for (std::size_t i = 0; i < spec.cell_count(); ++i) {
      const Eigen::Vector3d c = spec.center(spec.unlinear(i));
      const bool inside = (c.array() > box.min.array()).all() && (c.array() < box.max.array()).all();
      expected += inside;
      CHECK(g.occupied(i) == inside);
    }
    CHECK(g.occupied_count() == expected);
    CHECK(expected == 4);
  }
}

TEST_CASE("scene parser reports malformed input") {
  CHECK_THROWS_AS(parse_scene("grid: [1, 2"), ParseError);
  CHECK_THROWS_AS(parse_scene("name: x\n"), ParseError);
  CHECK_THROWS_AS(parse_scene("grid:\n  cell_xy: 1\n  cell_z: 1\n  dims: [2, 2, two]\n"), ParseError);
  CHECK_THROWS_AS(parse_scene("grid:\n  cell_xy: 1\n  cell_z: 1\n  dims: [2, 0, 2]\n"), ValidationError);
  CHECK_THROWS_AS(parse_scene("grid:\n  cell_xy: -1\n  cell_z: 1\n  dims: [2, 2, 2]\n"), ValidationError);
  try {
    parse_scene("grid:\n  cell_xy: 1\n  cell_z: 1\n  dims: [2, 2, 2]\nboxes:\n  - min: [0, 0]\n    max: [1, 1, 1]\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("scene serialization round-trips") {
  for (const auto& name : preset_names()) {
    PresetParams params;
    params.seed = 7;
    const Scene s = make_preset(name, params);
    const Scene back = parse_scene(serialize_scene(s));
    CHECK(rasterize(back).same_content(rasterize(s)));
    CHECK(serialize_scene(back) == serialize_scene(s));
  }
  std::mt19937_64 rng(3);
  const OccupancyGrid g = oracle::random_grid(unit_spec(6, 5, 4, 0.5), 0.3, rng);
  CHECK(rasterize(parse_scene(serialize_scene(scene_from_grid(g)))).same_content(g));
}

TEST_CASE("distance field examples") {
  SUBCASE("all free gives the sentinel") {
    const DistanceField f = compute_distance_field(OccupancyGrid(unit_spec(5, 4, 3)));
    for (double d : f.raw()) CHECK(d == f.sentinel());
    CHECK(f.sentinel() == doctest::Approx(std::sqrt(25.0 + 16 + 9)));
  }
  SUBCASE("single occupied cell") {
    OccupancyGrid g(unit_spec(6, 6, 6));
    g.set_occupied({0, 0, 0});
    const DistanceField f = compute_distance_field(g);
    CHECK(f.at(CellIndex(3, 0, 0)) == 3.0);
    CHECK(f.at(CellIndex(0, 0, 0)) == 0.0);
    CHECK(f.source_revision() == g.revision());
  }
}

TEST_CASE("distance field matches brute force on random anisotropic grids") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const double cz = t % 2 ? std::tan(std::numbers::pi / 12) : 0.7;
    const OccupancyGrid g = oracle::random_grid(unit_spec(12, 12, 8, cz), 0.05, rng);
    const DistanceField f = compute_distance_field(g);
    const auto ref = oracle::brute_force_edt(g);
    double err = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) err = std::max(err, std::abs(ref[i] - f.at(i)));
    CHECK(err < 1e-9);
  }
}

TEST_CASE("distance field matches brute force exhaustively up to 16 cubed") {
  std::mt19937_64 rng(5);
  for (int n : {1, 2, 3, 5, 8, 16}) {
    for (double p : {0.0, 0.02, 0.3, 1.0}) {
      const OccupancyGrid g = oracle::random_grid(unit_spec(n, n, n, 0.6), p, rng);
      const DistanceField f = compute_distance_field(g);
      const auto ref = oracle::brute_force_edt(g);
      double err = 0.0;
      for (std::size_t i = 0; i < ref.size(); ++i) err = std::max(err, std::abs(ref[i] - f.at(i)));
      CHECK(err < 1e-9);
    }
  }
}

TEST_CASE("distance field is zero on obstacles and 1-Lipschitz") {
  std::mt19937_64 rng(2);
  const OccupancyGrid g = oracle::random_grid(unit_spec(10, 9, 7, 0.4), 0.08, rng);
  const DistanceField f = compute_distance_field(g);
  const auto& spec = g.spec();
  for (std::size_t i = 0; i < spec.cell_count(); ++i)
    if (g.occupied(i)) CHECK(f.at(i) == 0.0);
  std::uniform_int_distribution<std::size_t> pick(0, spec.cell_count() - 1);
  for (int k = 0; k < 2000; ++k) {
    const std::size_t a = pick(rng), b = pick(rng);
    const double metric = (spec.center(spec.unlinear(a)) - spec.center(spec.unlinear(b))).norm();
    CHECK(std::abs(f.at(a) - f.at(b)) <= metric + 1e-12);
  }
}

TEST_CASE("distance queries interpolate trilinearly") {
  OccupancyGrid g(unit_spec(8, 8, 8));
  g.set_occupied({0, 0, 0});
  const DistanceField f = compute_distance_field(g);
  const auto& spec = g.spec();
  SUBCASE("cell centers return stored values") {
    for (std::size_t i = 0; i < spec.cell_count(); i += 7)
      CHECK(f.query(spec.center(spec.unlinear(i))) == f.at(i));
  }
  SUBCASE("midpoint between two centers") {
    // Along x at y = z = 0 the stored distances are 1 and 2.
    CHECK(f.query({2.0, 0.5, 0.5}) == doctest::Approx(1.5).epsilon(1e-12));
  }
  SUBCASE("random points stay within the surrounding cell range") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.5, 7.5);
    for (int k = 0; k < 100; ++k) {
      const Eigen::Vector3d p(u(rng), u(rng), u(rng));
      const Eigen::Vector3i lo = (p.array() - 0.5).floor().cast<int>();
      double mn = 1e9, mx = -1e9;
      for (int dx = 0; dx < 2; ++dx)
        for (int dy = 0; dy < 2; ++dy)
          for (int dz = 0; dz < 2; ++dz) {
            const CellIndex c(std::min(lo.x() + dx, 7), std::min(lo.y() + dy, 7), std::min(lo.z() + dz, 7));
            mn = std::min(mn, f.at(c));
            mx = std::max(mx, f.at(c));
          }
      const double v = f.query(p);
      CHECK(v >= mn - 1e-12);
      CHECK(v <= mx + 1e-12);
    }
  }
  SUBCASE("outside points name the axis") {
    try {
      f.query({1.0, 9.0, 1.0});
      FAIL("expected out_of_range");
    } catch (const std::out_of_range& e) {
      CHECK(std::string(e.what()).find("axis y") != std::string::npos);
    }
  }
}

TEST_CASE("signed field is negative inside obstacles and equals the distance outside") {
  OccupancyGrid g(unit_spec(9, 9, 9));
  for (int x = 3; x < 6; ++x)
    for (int y = 3; y < 6; ++y)
      for (int z = 3; z < 6; ++z) g.set_occupied({x, y, z});
  const DistanceField f = compute_distance_field(g);
  CHECK(f.sample_signed(g.spec().center({4, 4, 4})).distance == doctest::Approx(-2.0));
  CHECK(f.sample_signed(g.spec().center({3, 4, 4})).distance == doctest::Approx(-1.0));
  const Eigen::Vector3d outside = g.spec().center({0, 4, 4});
  CHECK(f.sample_signed(outside).distance == doctest::Approx(f.query(outside)));
}

TEST_CASE("obstacle cost examples and continuity") {
  const ObstacleCostParams p;  // d_min 1, d_safe 3, o_far 1, o_close 10
  CHECK(obstacle_cost(p.d_safe, p) == 0.0);
  CHECK(obstacle_cost(1.0, p) == doctest::Approx(2.0));
  CHECK(obstacle_cost(0.5, p) == doctest::Approx(7.0));
  CHECK(obstacle_cost(10.0, p) == 0.0);
  CHECK_THROWS_AS(obstacle_cost(-0.1, p), std::invalid_argument);
  const double eps = 1e-6;
  for (double d : {p.d_min, p.d_safe})
    CHECK(std::abs(obstacle_cost(d - eps, p) - obstacle_cost(d + eps, p)) <=
          (p.o_close + p.o_far) * 2 * eps);
  double prev = obstacle_cost(0.0, p);
  for (double d = 0.01; d < 4.0; d += 0.01) {
    const double c = obstacle_cost(d, p);
    CHECK(c <= prev + 1e-12);
    prev = c;
  }
  ObstacleCostParams bad;
  bad.d_min = 3.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ObstacleCostParams{};
  bad.o_close = 0.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
