#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace oft {

/// Real triple used for positions and directions (voxel units).
struct Vec3 {
  double x = 0, y = 0, z = 0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

/// Grid extents. A 2D image has nz == 1.
struct Dims {
  int nx = 1, ny = 1, nz = 1;

  constexpr std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  constexpr bool is_2d() const { return nz == 1; }
  constexpr bool valid() const { return nx > 0 && ny > 0 && nz > 0; }
  friend constexpr bool operator==(Dims, Dims) = default;
};

inline std::string to_string(Dims d) {
  return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

/// Dense scalar grid, x index fastest. Voxel (i,j,k) is centred at (i,j,k).
class Volume {
 public:
  Volume() = default;

  explicit Volume(Dims dims, float fill = 0.0f) : dims_(dims) {
    if (!dims.valid()) throw InvalidArgument("volume dims must be positive, got " + to_string(dims));
    data_.assign(dims.count(), fill);
  }

  Volume(Dims dims, std::vector<float> data) : dims_(dims), data_(std::move(data)) {
    if (!dims.valid()) throw InvalidArgument("volume dims must be positive, got " + to_string(dims));
    if (data_.size() != dims.count())
      throw DimensionMismatch("volume data has " + std::to_string(data_.size()) +
                              " values, dims " + to_string(dims) + " need " +
                              std::to_string(dims.count()));
  }

  Dims dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_.nx) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_.ny) * static_cast<std::size_t>(k));
  }
  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims_.nx && j < dims_.ny && k < dims_.nz;
  }

  float operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  float& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  float operator[](std::size_t n) const { return data_[n]; }
  float& operator[](std::size_t n) { return data_[n]; }

  std::span<const float> values() const { return data_; }
  std::span<float> values() { return data_; }

  bool all_finite() const {
    for (float v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Dims dims_{};
  std::vector<float> data_;
};

/// Per-voxel axial unit vector (v and -v are equivalent).
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(Dims dims) : dims_(dims), data_(3 * dims.count(), 0.0f) {
    if (!dims.valid()) throw InvalidArgument("vector field dims must be positive");
  }

  Dims dims() const { return dims_; }
  std::size_t size() const { return dims_.count(); }

  Vec3 at(std::size_t n) const { return {data_[3 * n], data_[3 * n + 1], data_[3 * n + 2]}; }
  void set(std::size_t n, Vec3 v) {
    data_[3 * n] = static_cast<float>(v.x);
    data_[3 * n + 1] = static_cast<float>(v.y);
    data_[3 * n + 2] = static_cast<float>(v.z);
  }

  std::span<const float> components() const { return data_; }

  friend bool operator==(const VectorField&, const VectorField&) = default;

 private:
  Dims dims_{};
  std::vector<float> data_;
};

namespace detail {

// a + t(b - a): exact at t == 0 and for a == b.
inline double lerp(double a, double b, double t) { return a + t * (b - a); }

// Cheap rejection of points whose 8 neighbours all lie outside [0, n-1].
inline bool far_outside(double p, int n) { return !(p > -1.0 && p < static_cast<double>(n)); }

}  // namespace detail

/// Trilinear interpolation with zero padding outside the grid.
inline double sample_scalar(const Volume& vol, Vec3 p) {
  const Dims d = vol.dims();
  if (detail::far_outside(p.x, d.nx) || detail::far_outside(p.y, d.ny) ||
      detail::far_outside(p.z, d.nz))
    return 0.0;

  const double fx0 = std::floor(p.x), fy0 = std::floor(p.y), fz0 = std::floor(p.z);
  const int i = static_cast<int>(fx0), j = static_cast<int>(fy0), k = static_cast<int>(fz0);
  const double tx = p.x - fx0, ty = p.y - fy0, tz = p.z - fz0;

  double v000, v100, v010, v110, v001, v101, v011, v111;
  if (i >= 0 && j >= 0 && k >= 0 && i + 1 < d.nx && j + 1 < d.ny && k + 1 < d.nz) {
    const std::size_t base = vol.index(i, j, k);
    const std::size_t sy = static_cast<std::size_t>(d.nx);
    const std::size_t sz = sy * static_cast<std::size_t>(d.ny);
    auto vals = vol.values();
    v000 = vals[base];
    v100 = vals[base + 1];
    v010 = vals[base + sy];
    v110 = vals[base + sy + 1];
    v001 = vals[base + sz];
    v101 = vals[base + sz + 1];
    v011 = vals[base + sz + sy];
    v111 = vals[base + sz + sy + 1];
  } else {
    auto at = [&](int a, int b, int c) -> double { return vol.contains(a, b, c) ? vol(a, b, c) : 0.0; };
    v000 = at(i, j, k);
    v100 = at(i + 1, j, k);
    v010 = at(i, j + 1, k);
    v110 = at(i + 1, j + 1, k);
    v001 = at(i, j, k + 1);
    v101 = at(i + 1, j, k + 1);
    v011 = at(i, j + 1, k + 1);
    v111 = at(i + 1, j + 1, k + 1);
  }
  using detail::lerp;
  const double c00 = lerp(v000, v100, tx);
  const double c10 = lerp(v010, v110, tx);
  const double c01 = lerp(v001, v101, tx);
  const double c11 = lerp(v011, v111, tx);
  const double c0 = lerp(c00, c10, ty);
  const double c1 = lerp(c01, c11, ty);
  return lerp(c0, c1, tz);
}

/// Index of the voxel centre nearest to coordinate c; exact .5 ties go to
/// the lower index.
inline double nearest_index(double c) {
  const double lower = std::floor(c);
  return c - lower > 0.5 ? lower + 1.0 : lower;
}

/// Flat index of the voxel nearest to p, or -1 when it falls outside.
inline std::int64_t nearest_voxel(Dims d, Vec3 p) {
  const double ri = nearest_index(p.x), rj = nearest_index(p.y), rk = nearest_index(p.z);
  if (!(ri >= 0 && rj >= 0 && rk >= 0 && ri < d.nx && rj < d.ny && rk < d.nz)) return -1;
  return static_cast<std::int64_t>(ri) +
         static_cast<std::int64_t>(d.nx) *
             (static_cast<std::int64_t>(rj) + static_cast<std::int64_t>(d.ny) * static_cast<std::int64_t>(rk));
}

/// Nearest-neighbour lookup; zero vector outside the grid.
inline Vec3 sample_vector_nearest(const VectorField& field, Vec3 p) {
  const std::int64_t n = nearest_voxel(field.dims(), p);
  if (n < 0) return {};
  return field.at(static_cast<std::size_t>(n));
}

}  // namespace oft
