#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "directions.hpp"
#include "parallel.hpp"
#include "volume.hpp"

namespace oft {

/// Path length and sampling density of the line and alignment integrals.
struct IntegralParams {
  double epsilon = 6.0;    ///< segment length in voxels
  double step_hint = 1.0;  ///< target spacing between samples along the segment

  void validate() const {
    if (!(epsilon > 0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be a positive finite number");
    if (!(step_hint > 0) || !std::isfinite(step_hint)) throw InvalidArgument("step must be a positive finite number");
    if (epsilon / step_hint > 1e6) throw InvalidArgument("epsilon/step exceeds 1e6 samples");
  }

  /// Number of midpoint samples m = ceil(epsilon / step_hint).
  std::size_t samples() const { return static_cast<std::size_t>(std::ceil(epsilon / step_hint)); }
  double spacing() const { return epsilon / static_cast<double>(samples()); }

  /// Signed offsets s_k = -epsilon/2 + (k + 0.5) h along the segment,
  /// mirrored so that s_{m-1-k} == -s_k exactly.
  std::vector<double> offsets() const {
    const auto half = half_offsets();
    std::vector<double> s(half);
    if (has_centre()) s.push_back(0.0);
    for (auto it = half.rbegin(); it != half.rend(); ++it) s.push_back(-*it);
    return s;
  }

  /// The negative offsets s_0 .. s_{m/2-1}; the rest are their mirror images
  /// plus a centre sample when m is odd.
  std::vector<double> half_offsets() const {
    const std::size_t m = samples();
    const double h = spacing();
    std::vector<double> s(m / 2);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = -epsilon / 2 + (static_cast<double>(k) + 0.5) * h;
    return s;
  }

  bool has_centre() const { return samples() % 2 == 1; }
};

/// Primary orientation field: strongest line integral per voxel and the
/// direction attaining it.
struct OrientationField {
  Volume strength;
  VectorField direction;
};

namespace detail {

inline void require_unit(Vec3 b) {
  if (std::abs(norm(b) - 1.0) > 1e-4) throw InvalidArgument("direction vector must have unit length");
}

inline void require_matching_dim(Dims d, const DirectionSet& dirs) {
  const int want = d.is_2d() ? 2 : 3;
  if (dirs.dim() != want)
    throw DimensionMismatch("volume " + to_string(d) + " needs a " + std::to_string(want) +
                            "D direction set, got " + std::to_string(dirs.dim()) + "D");
}

// 2(f.b)^2 - 1, with zero orientation contributing nothing.
inline double alignment_factor(Vec3 f, Vec3 b) {
  if (f.x == 0 && f.y == 0 && f.z == 0) return 0.0;
  const double c = dot(f, b);
  return 2.0 * c * c - 1.0;
}

// strength(q) * (2 (direction(q) . b)^2 - 1); zero outside the grid.
inline double aligned_strength(const OrientationField& field, Vec3 q, Vec3 b) {
  const std::int64_t nn = nearest_voxel(field.strength.dims(), q);
  if (nn < 0) return 0.0;
  const double factor = alignment_factor(field.direction.at(static_cast<std::size_t>(nn)), b);
  if (factor == 0.0) return 0.0;
  return sample_scalar(field.strength, q) * factor;
}

inline Vec3 voxel_centre(Dims d, std::size_t n) {
  const std::size_t nx = static_cast<std::size_t>(d.nx), ny = static_cast<std::size_t>(d.ny);
  return {static_cast<double>(n % nx), static_cast<double>((n / nx) % ny), static_cast<double>(n / (nx * ny))};
}

// Half-segment offsets s_k * b for every (direction, k), direction-major.
inline std::vector<Vec3> segment_offsets(const DirectionSet& dirs, const IntegralParams& p) {
  const auto s = p.half_offsets();
  std::vector<Vec3> out;
  out.reserve(dirs.count() * s.size());
  for (const Vec3& b : dirs)
    for (double sk : s) out.push_back(sk * b);
  return out;
}

// Midpoint sum over a segment centred at x: mirrored samples are added in
// pairs, then the centre sample. Flipping the direction swaps the members of
// each pair, so the result is bit-identical for b and -b.
template <class Sample>
double segment_sum(Vec3 x, const Vec3* half, std::size_t n_half, bool centre, Sample&& sample) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n_half; ++k) sum += sample(x + half[k]) + sample(x - half[k]);
  if (centre) sum += sample(x);
  return sum;
}

/// Calls fn(voxel, profile) for every voxel, where profile[d] is the line
/// integral along dirs[d]. Rows are distributed over workers; fn must only
/// write state owned by `voxel`.
template <class Fn>
void sweep_line_profiles(const Volume& vol, const DirectionSet& dirs, const IntegralParams& p, Fn&& fn) {
  p.validate();
  require_matching_dim(vol.dims(), dirs);
  const Dims d = vol.dims();
  const auto offsets = segment_offsets(dirs, p);
  const std::size_t half = p.samples() / 2;
  const bool centre = p.has_centre();
  const double h = p.spacing();
  const std::size_t rows = static_cast<std::size_t>(d.ny) * static_cast<std::size_t>(d.nz);
  auto sample = [&vol](Vec3 q) { return sample_scalar(vol, q); };
  parallel_for(rows, [&](std::size_t row) {
    std::vector<double> profile(dirs.count());
    for (int i = 0; i < d.nx; ++i) {
      const std::size_t voxel = row * static_cast<std::size_t>(d.nx) + static_cast<std::size_t>(i);
      const Vec3 x = voxel_centre(d, voxel);
      for (std::size_t dir = 0; dir < dirs.count(); ++dir)
        profile[dir] = h * segment_sum(x, offsets.data() + dir * half, half, centre, sample);
      fn(voxel, std::span<const double>(profile));
    }
  });
}

/// Same as sweep_line_profiles for the alignment integral over a field.
template <class Fn>
void sweep_alignment_profiles(const OrientationField& field, const DirectionSet& dirs, const IntegralParams& p,
                              Fn&& fn) {
  p.validate();
  const Dims d = field.strength.dims();
  if (field.direction.dims() != d) throw DimensionMismatch("orientation field strength/direction dims differ");
  require_matching_dim(d, dirs);
  const auto offsets = segment_offsets(dirs, p);
  const std::size_t half = p.samples() / 2;
  const bool centre = p.has_centre();
  const double h = p.spacing();
  const std::size_t rows = static_cast<std::size_t>(d.ny) * static_cast<std::size_t>(d.nz);
  parallel_for(rows, [&](std::size_t row) {
    std::vector<double> profile(dirs.count());
    for (int i = 0; i < d.nx; ++i) {
      const std::size_t voxel = row * static_cast<std::size_t>(d.nx) + static_cast<std::size_t>(i);
      const Vec3 x = voxel_centre(d, voxel);
      for (std::size_t dir = 0; dir < dirs.count(); ++dir) {
        const Vec3 b = dirs[dir];
        profile[dir] = h * segment_sum(x, offsets.data() + dir * half, half, centre,
                                       [&](Vec3 q) { return aligned_strength(field, q, b); });
      }
      fn(voxel, std::span<const double>(profile));
    }
  });
}

// Index of the first maximum; -1 when every entry is exactly zero.
inline std::ptrdiff_t argmax_or_none(std::span<const double> profile) {
  std::size_t best = 0;
  bool all_zero = profile[0] == 0.0;
  for (std::size_t n = 1; n < profile.size(); ++n) {
    if (profile[n] > profile[best]) best = n;
    if (profile[n] != 0.0) all_zero = false;
  }
  return all_zero ? -1 : static_cast<std::ptrdiff_t>(best);
}

}  // namespace detail

/// Integral of the volume along a length-epsilon segment centred at x with
/// direction b (midpoint rule, trilinear sampling, zero outside the grid).
inline double line_integral(const Volume& vol, Vec3 x, Vec3 b, const IntegralParams& p) {
  p.validate();
  detail::require_unit(b);
  std::vector<Vec3> half;
  for (double s : p.half_offsets()) half.push_back(s * b);
  return p.spacing() *
         detail::segment_sum(x, half.data(), half.size(), p.has_centre(), [&](Vec3 q) { return sample_scalar(vol, q); });
}

/// Integral of strength(x + s b) * (2 (direction(x + s b) . b)^2 - 1).
/// Strength is interpolated trilinearly, direction taken from the nearest voxel.
inline double alignment_integral(const OrientationField& field, Vec3 x, Vec3 b, const IntegralParams& p) {
  p.validate();
  detail::require_unit(b);
  std::vector<Vec3> half;
  for (double s : p.half_offsets()) half.push_back(s * b);
  return p.spacing() * detail::segment_sum(x, half.data(), half.size(), p.has_centre(),
                                           [&](Vec3 q) { return detail::aligned_strength(field, q, b); });
}

/// Maximum line integral over the direction set and its (first) argmax at
/// every voxel centre. Voxels whose profile is identically zero get a zero
/// direction.
inline OrientationField orientation_field(const Volume& vol, const DirectionSet& dirs, const IntegralParams& p) {
  OrientationField out{Volume(vol.dims()), VectorField(vol.dims())};
  detail::sweep_line_profiles(vol, dirs, p, [&](std::size_t voxel, std::span<const double> profile) {
    const auto best = detail::argmax_or_none(profile);
    out.strength[voxel] = best < 0 ? 0.0f : static_cast<float>(profile[static_cast<std::size_t>(best)]);
    out.direction.set(voxel, best < 0 ? Vec3{} : dirs[static_cast<std::size_t>(best)]);
  });
  return out;
}

}  // namespace oft
