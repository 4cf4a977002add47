#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "volume.hpp"

namespace oft {

/// Discretised set of unit vectors covering a half-space exactly once.
/// 2D sets live in the z = 0 plane.
class DirectionSet {
 public:
  /// Validates and wraps an explicit list. Every vector must be unit length,
  /// lie in the canonical half-space (z>0, or z=0 and y>0, or z=y=0 and x>0)
  /// and no two may be antipodal.
  static DirectionSet from_vectors(int dim, std::vector<Vec3> vectors) {
    if (dim != 2 && dim != 3) throw InvalidArgument("direction set dim must be 2 or 3");
    if (vectors.empty()) throw InvalidArgument("direction set must not be empty");
    for (std::size_t a = 0; a < vectors.size(); ++a) {
      const Vec3 v = vectors[a];
      if (std::abs(norm(v) - 1.0) > 1e-6) throw InvalidArgument("direction " + std::to_string(a) + " is not unit length");
      if (dim == 2 && v.z != 0.0) throw InvalidArgument("2D direction " + std::to_string(a) + " has a z component");
      if (!in_canonical_half_space(v))
        throw InvalidArgument("direction " + std::to_string(a) + " is outside the canonical half-space");
      for (std::size_t b = 0; b < a; ++b)
        if (dot(v, vectors[b]) < -1.0 + 5e-13)
          throw InvalidArgument("directions " + std::to_string(b) + " and " + std::to_string(a) + " are antipodal");
    }
    return DirectionSet(dim, std::move(vectors));
  }

  static bool in_canonical_half_space(Vec3 v) {
    return v.z > 0 || (v.z == 0 && v.y > 0) || (v.z == 0 && v.y == 0 && v.x > 0);
  }

  int dim() const { return dim_; }
  std::size_t count() const { return vectors_.size(); }
  const std::vector<Vec3>& vectors() const { return vectors_; }
  const Vec3& operator[](std::size_t n) const { return vectors_[n]; }

  auto begin() const { return vectors_.begin(); }
  auto end() const { return vectors_.end(); }

 private:
  DirectionSet(int dim, std::vector<Vec3> v) : dim_(dim), vectors_(std::move(v)) {}

  friend DirectionSet directions_2d(int);
  friend DirectionSet directions_3d(int);

  int dim_ = 3;
  std::vector<Vec3> vectors_;
};

inline constexpr int kDefaultDirections2d = 36;
inline constexpr int kDefaultDirections3d = 96;

/// K angles k*pi/K in [0, pi).
inline DirectionSet directions_2d(int k_count) {
  if (k_count < 2) throw InvalidArgument("2D direction count must be >= 2, got " + std::to_string(k_count));
  std::vector<Vec3> v;
  v.reserve(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k) {
    const double theta = k * std::numbers::pi / k_count;
    // exact axes for 0 and pi/2 so the set is axis-aligned where possible
    if (k == 0)
      v.push_back({1.0, 0.0, 0.0});
    else if (2 * k == k_count)
      v.push_back({0.0, 1.0, 0.0});
    else
      v.push_back({std::cos(theta), std::sin(theta), 0.0});
  }
  return DirectionSet(2, std::move(v));
}

/// Spherical Fibonacci lattice over the upper hemisphere:
/// z = (k + 0.5)/K, azimuth 2*pi*k*g with g = (sqrt(5) - 1)/2.
inline DirectionSet directions_3d(int k_count) {
  if (k_count < 3) throw InvalidArgument("3D direction count must be >= 3, got " + std::to_string(k_count));
  const double golden_fraction = (std::sqrt(5.0) - 1.0) / 2.0;
  std::vector<Vec3> v;
  v.reserve(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k) {
    const double z = (k + 0.5) / k_count;
    const double r = std::sqrt(1.0 - z * z);
    const double phi = 2.0 * std::numbers::pi * k * golden_fraction;
    v.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return DirectionSet(3, std::move(v));
}

/// The default set for a volume's dimensionality.
inline DirectionSet default_directions(Dims d, int k_count = 0) {
  if (d.is_2d()) return directions_2d(k_count > 0 ? k_count : kDefaultDirections2d);
  return directions_3d(k_count > 0 ? k_count : kDefaultDirections3d);
}

}  // namespace oft
