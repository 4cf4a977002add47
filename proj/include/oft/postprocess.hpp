#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "parallel.hpp"
#include "volume.hpp"

namespace oft {

/// Binary volume: 1 where vol > t, else 0.
inline Volume threshold(const Volume& vol, double t) {
  if (!std::isfinite(t)) throw InvalidArgument("threshold must be finite");
  Volume out(vol.dims());
  for (std::size_t n = 0; n < vol.size(); ++n) out[n] = vol[n] > t ? 1.0f : 0.0f;
  return out;
}

/// Value at percentile q in [0, 100] (nearest rank), so that at most
/// (100 - q)% of voxels lie strictly above it.
inline double percentile_value(const Volume& vol, double q) {
  if (!(q >= 0 && q <= 100)) throw InvalidArgument("percentile must be within [0, 100]");
  std::vector<float> v(vol.values().begin(), vol.values().end());
  const std::size_t n = v.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank - 1), v.end());
  return v[rank - 1];
}

/// Median of a sequence; mean of the two middle values for even counts.
inline double median_of(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median of an empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline std::vector<double> slice_medians(const Volume& vol) {
  const Dims d = vol.dims();
  const std::size_t plane = static_cast<std::size_t>(d.nx) * static_cast<std::size_t>(d.ny);
  std::vector<double> medians(static_cast<std::size_t>(d.nz));
  parallel_for(medians.size(), [&](std::size_t z) {
    auto s = vol.values().subspan(z * plane, plane);
    medians[z] = median_of(std::vector<double>(s.begin(), s.end()));
  });
  return medians;
}

/// Scales each z-slice so its median equals `target`; without a target the
/// median of the slice medians is used. Slices with median <= 1e-12 are
/// left as they are.
inline Volume normalize_slice_median(const Volume& vol, std::optional<double> target = std::nullopt) {
  const Dims d = vol.dims();
  const auto medians = slice_medians(vol);
  const double goal = target ? *target : median_of(medians);
  const std::size_t plane = static_cast<std::size_t>(d.nx) * static_cast<std::size_t>(d.ny);
  Volume out = vol;
  for (std::size_t z = 0; z < medians.size(); ++z) {
    if (medians[z] <= 1e-12) continue;
    const double scale = goal / medians[z];
    for (float& x : out.values().subspan(z * plane, plane)) x = static_cast<float>(x * scale);
  }
  return out;
}

}  // namespace oft
