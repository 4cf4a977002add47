#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "integrals.hpp"

namespace oft {

/// Maximum, mean and mean absolute deviation of a directional profile.
struct ProfileStats {
  double max = 0, mean = 0, deviation = 0;

  static ProfileStats of(std::span<const double> profile) {
    ProfileStats s;
    s.max = profile[0];
    double sum = 0.0;
    for (double v : profile) {
      s.max = std::max(s.max, v);
      sum += v;
    }
    const double k = static_cast<double>(profile.size());
    s.mean = sum / k;
    double dev = 0.0;
    for (double v : profile) dev += std::abs(s.mean - v);
    s.deviation = dev / k;
    return s;
  }
};

/// The six per-voxel measures: w1 max line integral, w2 max alignment
/// integral, w3/w4 their means, w5/w6 their mean absolute deviations.
struct MeasureStack {
  Volume w1, w2, w3, w4, w5, w6;

  Dims dims() const { return w1.dims(); }

  /// Measure i in 1..6.
  const Volume& operator[](int i) const {
    switch (i) {
      case 1: return w1;
      case 2: return w2;
      case 3: return w3;
      case 4: return w4;
      case 5: return w5;
      case 6: return w6;
      default: throw InvalidArgument("measure index must be in 1..6");
    }
  }

  bool consistent() const {
    const Dims d = w1.dims();
    return w2.dims() == d && w3.dims() == d && w4.dims() == d && w5.dims() == d && w6.dims() == d;
  }
};

struct LineMeasures {
  Volume max, mean, deviation;
  OrientationField field;
};

struct AlignmentMeasures {
  Volume max, mean, deviation;
};

/// One sweep over the line-integral profiles: w1, w3, w5 and the orientation field.
inline LineMeasures line_measures(const Volume& vol, const DirectionSet& dirs, const IntegralParams& p) {
  const Dims d = vol.dims();
  LineMeasures out{Volume(d), Volume(d), Volume(d), {Volume(d), VectorField(d)}};
  detail::sweep_line_profiles(vol, dirs, p, [&](std::size_t voxel, std::span<const double> profile) {
    const auto stats = ProfileStats::of(profile);
    const auto best = detail::argmax_or_none(profile);
    out.max[voxel] = static_cast<float>(stats.max);
    out.mean[voxel] = static_cast<float>(stats.mean);
    out.deviation[voxel] = static_cast<float>(stats.deviation);
    out.field.strength[voxel] = best < 0 ? 0.0f : static_cast<float>(profile[static_cast<std::size_t>(best)]);
    out.field.direction.set(voxel, best < 0 ? Vec3{} : dirs[static_cast<std::size_t>(best)]);
  });
  return out;
}

/// Second sweep over alignment-integral profiles of a stored field: w2, w4, w6.
inline AlignmentMeasures alignment_measures(const OrientationField& field, const DirectionSet& dirs,
                                            const IntegralParams& p) {
  const Dims d = field.strength.dims();
  AlignmentMeasures out{Volume(d), Volume(d), Volume(d)};
  detail::sweep_alignment_profiles(field, dirs, p, [&](std::size_t voxel, std::span<const double> profile) {
    const auto stats = ProfileStats::of(profile);
    out.max[voxel] = static_cast<float>(stats.max);
    out.mean[voxel] = static_cast<float>(stats.mean);
    out.deviation[voxel] = static_cast<float>(stats.deviation);
  });
  return out;
}

inline MeasureStack assemble(LineMeasures line, AlignmentMeasures align) {
  return {std::move(line.max),  std::move(align.max),  std::move(line.mean),
          std::move(align.mean), std::move(line.deviation), std::move(align.deviation)};
}

}  // namespace oft
