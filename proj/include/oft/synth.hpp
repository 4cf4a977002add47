#pragma once

// Synthetic test data: a closed parametric curve rasterised as a tube,
// spherical clutter blobs and additive Gaussian noise.
//
// Random numbers come from a counter-based SplitMix64 stream:
//   u_n = mix(seed + (n + 1) * 0x9E3779B97F4A7C15)
//   mix(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//           z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//           z =  z ^ (z >> 31)
// uniform in [0,1) = (u >> 11) * 2^-53. Normals use Box-Muller on pairs
// (u1 in (0,1], u2 in [0,1)): r = sqrt(-2 ln u1), z0 = r cos(2 pi u2),
// z1 = r sin(2 pi u2), consumed in that order.
// Draw order: clutter centres (x, y[, z] per blob) first, then one normal
// per voxel in x-fastest order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "volume.hpp"

namespace oft {

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return mix(seed_ + (++counter_) * kGamma); }
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform_open_low() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open_low();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0;
  bool has_spare_ = false;
};

struct SynthParams {
  Dims dims{96, 96, 96};
  double curve_amplitude = 0.75;  ///< curve extent as a fraction of the half-size per axis
  double curve_thickness = 4.0;   ///< tube diameter, voxels
  double noise_sigma = 0.25;
  double clutter_density = 0.02;  ///< target fraction of voxels covered by blobs
  double clutter_radius = 1.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (!dims.valid()) throw InvalidArgument("synth dims must be positive");
    if (!(curve_thickness >= 1)) throw InvalidArgument("curve thickness must be >= 1");
    if (!(noise_sigma >= 0)) throw InvalidArgument("noise sigma must be >= 0");
    if (!(clutter_density >= 0 && clutter_density <= 0.5)) throw InvalidArgument("clutter density must be in [0, 0.5]");
    if (!(clutter_radius > 0)) throw InvalidArgument("clutter radius must be positive");
    if (!(curve_amplitude > 0 && curve_amplitude <= 1)) throw InvalidArgument("curve amplitude must be in (0, 1]");
  }
};

struct SynthVolume {
  Volume image;    ///< tube + clutter + noise
  Volume truth;    ///< 1 on tube voxels
  Volume clutter;  ///< 1 on blob voxels
};

namespace detail {

inline double segment_distance(Vec3 p, Vec3 a, Vec3 b) {
  const Vec3 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

// Marks every voxel within `radius` of the closed polyline.
inline void rasterize_tube(Volume& mask, const std::vector<Vec3>& pts, double radius) {
  const Dims d = mask.dims();
  for (std::size_t s = 0; s < pts.size(); ++s) {
    const Vec3 a = pts[s], b = pts[(s + 1) % pts.size()];
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - radius)));
    const int x1 = std::min(d.nx - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - radius)));
    const int y1 = std::min(d.ny - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + radius)));
    const int z0 = std::max(0, static_cast<int>(std::floor(std::min(a.z, b.z) - radius)));
    const int z1 = std::min(d.nz - 1, static_cast<int>(std::ceil(std::max(a.z, b.z) + radius)));
    for (int k = z0; k <= z1; ++k)
      for (int j = y0; j <= y1; ++j)
        for (int i = x0; i <= x1; ++i)
          if (segment_distance({double(i), double(j), double(k)}, a, b) <= radius) mask(i, j, k) = 1.0f;
  }
}

// Adds balls (discs in 2D) at uniform random centres until `density` of
// the voxels are covered.
inline void add_clutter(Volume& mask, double density, double radius, CounterRng& rng) {
  const Dims d = mask.dims();
  const std::size_t target = static_cast<std::size_t>(std::ceil(density * static_cast<double>(d.count())));
  if (target == 0) return;
  std::size_t covered = 0;
  const double ball = d.is_2d() ? std::numbers::pi * radius * radius : 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
  const std::size_t max_blobs = 100 + static_cast<std::size_t>(20.0 * static_cast<double>(target) / std::max(ball, 1.0));
  const int r = static_cast<int>(std::ceil(radius));
  for (std::size_t blob = 0; blob < max_blobs && covered < target; ++blob) {
    const Vec3 c{rng.uniform() * d.nx, rng.uniform() * d.ny, d.is_2d() ? 0.0 : rng.uniform() * d.nz};
    const int ci = static_cast<int>(std::floor(c.x)), cj = static_cast<int>(std::floor(c.y)),
              ck = static_cast<int>(std::floor(c.z));
    for (int k = std::max(0, ck - r); k <= std::min(d.nz - 1, ck + r + 1); ++k)
      for (int j = std::max(0, cj - r); j <= std::min(d.ny - 1, cj + r + 1); ++j)
        for (int i = std::max(0, ci - r); i <= std::min(d.nx - 1, ci + r + 1); ++i)
          if (norm(Vec3{double(i), double(j), double(k)} - c) <= radius && mask(i, j, k) == 0.0f) {
            mask(i, j, k) = 1.0f;
            ++covered;
          }
  }
}

inline SynthVolume finish_synth(Volume truth, const SynthParams& p) {
  CounterRng rng(p.seed);
  Volume clutter(p.dims);
  add_clutter(clutter, p.clutter_density, p.clutter_radius, rng);
  Volume image(p.dims);
  for (std::size_t n = 0; n < image.size(); ++n) {
    double v = std::max(truth[n], clutter[n]);
    if (p.noise_sigma > 0) v += p.noise_sigma * rng.normal();
    image[n] = static_cast<float>(v);
  }
  return {std::move(image), std::move(truth), std::move(clutter)};
}

}  // namespace detail

/// Closed curve (sin t, cos t, cos 2t), t in [0, 2 pi), scaled by
/// curve_amplitude about the volume centre, drawn as a tube of diameter
/// curve_thickness with intensity 1, plus clutter and noise.
inline SynthVolume make_curve_volume(const SynthParams& p) {
  p.validate();
  const Dims d = p.dims;
  const Vec3 centre{(d.nx - 1) / 2.0, (d.ny - 1) / 2.0, (d.nz - 1) / 2.0};
  const Vec3 half{p.curve_amplitude * (d.nx - 1) / 2.0, p.curve_amplitude * (d.ny - 1) / 2.0,
                  p.curve_amplitude * (d.nz - 1) / 2.0};
  constexpr int kSegments = 2048;
  std::vector<Vec3> pts;
  pts.reserve(kSegments);
  for (int s = 0; s < kSegments; ++s) {
    const double t = 2.0 * std::numbers::pi * s / kSegments;
    pts.push_back({centre.x + half.x * std::sin(t), centre.y + half.y * std::cos(t),
                   centre.z + half.z * std::cos(2.0 * t)});
  }
  Volume truth(d);
  detail::rasterize_tube(truth, pts, p.curve_thickness / 2.0);
  return detail::finish_synth(std::move(truth), p);
}

/// 2D analogue (nz forced to 1): a circle with a five-fold sinusoidal
/// radius perturbation, r(t) = R (1 + 0.15 sin 5t), with disc clutter.
inline SynthVolume make_curve_image_2d(SynthParams p) {
  p.dims.nz = 1;
  p.validate();
  const Dims d = p.dims;
  const double cx = (d.nx - 1) / 2.0, cy = (d.ny - 1) / 2.0;
  const double radius = p.curve_amplitude * (std::min(d.nx, d.ny) - 1) / 2.0 / 1.15;
  constexpr int kSegments = 2048;
  std::vector<Vec3> pts;
  pts.reserve(kSegments);
  for (int s = 0; s < kSegments; ++s) {
    const double t = 2.0 * std::numbers::pi * s / kSegments;
    const double r = radius * (1.0 + 0.15 * std::sin(5.0 * t));
    pts.push_back({cx + r * std::cos(t), cy + r * std::sin(t), 0.0});
  }
  Volume truth(d);
  detail::rasterize_tube(truth, pts, p.curve_thickness / 2.0);
  return detail::finish_synth(std::move(truth), p);
}

}  // namespace oft
