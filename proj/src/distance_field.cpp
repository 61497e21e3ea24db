#include "fovtraj/distance_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fovtraj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas s2 * (x - p)^2 + f[p] over the finite sites,
// evaluated at every integer x. Sites with f = inf are skipped.
void transform_line(std::vector<double>& f, double s2, std::vector<int>& v,
                    std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  auto intersect = [&](int p, int q) {
    return ((f[q] + s2 * q * q) - (f[p] + s2 * p * p)) / (2.0 * s2 * (q - p));
  };
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double x = intersect(v[k], q);
    // z[0] is -inf, so k never drops below zero.
    while (x <= z[k]) {
      --k;
      x = intersect(v[k], q);
    }
    ++k;
    v[k] = q;
    z[k] = x;
    z[k + 1] = kInf;
  }
  if (k < 0) return;  // no sites: line stays at inf
  std::vector<double> out(n);
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double d = q - v[j];
    out[q] = s2 * d * d + f[v[j]];
  }
  f.swap(out);
}

constexpr const char* kAxisName[3] = {"x", "y", "z"};

// Squared metric distance from every cell center to the nearest site, or
// inf everywhere when there is no site.
std::vector<double> squared_edt(const GridSpec& spec, std::vector<double> sq) {
  const int nx = spec.dims.x(), ny = spec.dims.y(), nz = spec.dims.z();
  const int longest = std::max({nx, ny, nz});
  std::vector<int> v(longest);
  std::vector<double> z(longest + 1);
  std::vector<double> line;

  const double s2[3] = {spec.cell_xy * spec.cell_xy, spec.cell_xy * spec.cell_xy,
                        spec.cell_z * spec.cell_z};
  const std::size_t stride[3] = {1, static_cast<std::size_t>(nx),
                                 static_cast<std::size_t>(nx) * ny};
  for (int axis = 0; axis < 3; ++axis) {
    const int len = spec.dims[axis];
    line.resize(len);
    // Iterate over all lines parallel to `axis`.
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    for (int u = 0; u < spec.dims[a1]; ++u) {
      for (int w = 0; w < spec.dims[a2]; ++w) {
        const std::size_t base = u * stride[a1] + w * stride[a2];
        for (int t = 0; t < len; ++t) line[t] = sq[base + t * stride[axis]];
        transform_line(line, s2[axis], v, z);
        for (int t = 0; t < len; ++t) sq[base + t * stride[axis]] = line[t];
      }
    }
  }
  return sq;
}

}  // namespace

DistanceField compute_distance_field(const OccupancyGrid& grid) {
  DistanceField field;
  field.spec_ = grid.spec();
  field.source_revision_ = grid.revision();
  const GridSpec& spec = grid.spec();
  const std::size_t n = spec.cell_count();

  std::vector<double> outside(n), inside(n);
  bool any_free = false;
  for (std::size_t i = 0; i < n; ++i) {
    const bool occ = grid.occupied(i);
    field.has_obstacles_ = field.has_obstacles_ || occ;
    any_free = any_free || !occ;
    outside[i] = occ ? 0.0 : kInf;
    inside[i] = occ ? kInf : 0.0;
  }
  field.distance_.assign(n, spec.diagonal());
  field.signed_.assign(n, spec.diagonal());
  if (!field.has_obstacles_) return field;

  outside = squared_edt(spec, std::move(outside));
  for (std::size_t i = 0; i < n; ++i) field.distance_[i] = std::sqrt(outside[i]);
  if (any_free) inside = squared_edt(spec, std::move(inside));
  for (std::size_t i = 0; i < n; ++i) {
    const double depth = any_free ? std::sqrt(inside[i]) : spec.diagonal();
    field.signed_[i] = field.distance_[i] - depth;
  }
  return field;
}

double DistanceField::query(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d rel = p - spec_.origin;
  const Eigen::Vector3d ext = spec_.extent();
  for (int a = 0; a < 3; ++a) {
    if (!(rel[a] >= 0.0 && rel[a] <= ext[a])) {
      throw std::out_of_range(std::string("distance query outside grid on axis ") +
                              kAxisName[a] + ": " + std::to_string(p[a]));
    }
  }
  return sample(p).distance;
}

DistanceField::Sample DistanceField::sample(const Eigen::Vector3d& p) const {
  return interpolate(distance_, p);
}

DistanceField::Sample DistanceField::sample_signed(const Eigen::Vector3d& p) const {
  return interpolate(signed_, p);
}

DistanceField::Sample DistanceField::interpolate(const std::vector<double>& values,
                                                 const Eigen::Vector3d& p) const {
  Sample s;
  const Eigen::Vector3d size = spec_.cell_size();
  const Eigen::Vector3d ext = spec_.extent();
  int base[3];
  double frac[3];
  bool axis_clamped[3];
  for (int a = 0; a < 3; ++a) {
    double rel = p[a] - spec_.origin[a];
    if (!(rel >= 0.0 && rel <= ext[a])) s.clamped = true;
    // Continuous index in center coordinates.
    double u = rel / size[a] - 0.5;
    const double hi = spec_.dims[a] - 1;
    axis_clamped[a] = !(u > 0.0 && u < hi);
    u = std::clamp(std::isfinite(u) ? u : 0.0, 0.0, hi);
    int i0 = static_cast<int>(std::floor(u));
    if (i0 >= spec_.dims[a] - 1) i0 = std::max(0, spec_.dims[a] - 2);
    base[a] = i0;
    frac[a] = spec_.dims[a] > 1 ? u - i0 : 0.0;
  }
  auto value = [&](int dx, int dy, int dz) {
    const CellIndex c(std::min(base[0] + dx, spec_.dims[0] - 1),
                      std::min(base[1] + dy, spec_.dims[1] - 1),
                      std::min(base[2] + dz, spec_.dims[2] - 1));
    return values[spec_.linear_unchecked(c)];
  };
  double c[2][2][2];
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) c[dx][dy][dz] = value(dx, dy, dz);

  const double fx = frac[0], fy = frac[1], fz = frac[2];
  // Interpolate along x, then y, then z, keeping partial derivatives.
  double cxy[2][2], dcxy[2][2];
  for (int dy = 0; dy < 2; ++dy)
    for (int dz = 0; dz < 2; ++dz) {
      cxy[dy][dz] = c[0][dy][dz] * (1 - fx) + c[1][dy][dz] * fx;
      dcxy[dy][dz] = c[1][dy][dz] - c[0][dy][dz];
    }
  double cz[2], dcz_dx[2], dcz_dy[2];
  for (int dz = 0; dz < 2; ++dz) {
    cz[dz] = cxy[0][dz] * (1 - fy) + cxy[1][dz] * fy;
    dcz_dx[dz] = dcxy[0][dz] * (1 - fy) + dcxy[1][dz] * fy;
    dcz_dy[dz] = cxy[1][dz] - cxy[0][dz];
  }
  s.distance = cz[0] * (1 - fz) + cz[1] * fz;
  const double du[3] = {dcz_dx[0] * (1 - fz) + dcz_dx[1] * fz,
                        dcz_dy[0] * (1 - fz) + dcz_dy[1] * fz, cz[1] - cz[0]};
  for (int a = 0; a < 3; ++a) s.gradient[a] = axis_clamped[a] ? 0.0 : du[a] / size[a];
  return s;
}

}  // namespace fovtraj
