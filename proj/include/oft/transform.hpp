#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "measures.hpp"

namespace oft {

/// Which measures are multiplied together into the enhanced volume.
enum class CombineMode {
  All,          ///< w1 w2 w3 w4 w5 w6
  NoMeanAlign,  ///< all but w4
  LinePair,     ///< w1 w3
};

inline std::string_view to_string(CombineMode m) {
  switch (m) {
    case CombineMode::All: return "all";
    case CombineMode::NoMeanAlign: return "no-mean-align";
    case CombineMode::LinePair: return "line-pair";
  }
  return "?";
}

inline CombineMode parse_combine_mode(std::string_view s) {
  if (s == "all") return CombineMode::All;
  if (s == "no-mean-align") return CombineMode::NoMeanAlign;
  if (s == "line-pair") return CombineMode::LinePair;
  throw InvalidArgument("unknown combine mode \"" + std::string(s) + "\" (all|no-mean-align|line-pair)");
}

inline std::vector<int> participating_measures(CombineMode m) {
  switch (m) {
    case CombineMode::All: return {1, 2, 3, 4, 5, 6};
    case CombineMode::NoMeanAlign: return {1, 2, 3, 5, 6};
    case CombineMode::LinePair: return {1, 3};
  }
  return {};
}

struct PipelineConfig {
  double epsilon = 6.0;
  int k_directions = 0;  ///< 0: 36 for 2D inputs, 96 for 3D
  CombineMode mode = CombineMode::NoMeanAlign;
  double step_hint = 1.0;
  bool invert = false;
  bool normalize_output = false;

  IntegralParams integral_params() const { return {epsilon, step_hint}; }

  void validate() const {
    integral_params().validate();
    if (k_directions < 0) throw InvalidArgument("direction count must be non-negative");
  }
};

/// Affine map to [0, 1]; constant volumes become all zeros.
inline void normalize_min_max(Volume& vol) {
  auto v = vol.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double min = *lo, range = static_cast<double>(*hi) - *lo;
  for (float& x : v) x = range > 0 ? static_cast<float>((x - min) / range) : 0.0f;
}

/// Product of the participating measures, each clamped below at zero.
/// Results beyond float range saturate at the largest finite float.
inline Volume combine(const MeasureStack& stack, CombineMode mode, bool normalize_output = false) {
  if (!stack.consistent()) throw DimensionMismatch("measure stack fields have different dims");
  const auto ids = participating_measures(mode);
  Volume out(stack.dims());
  std::vector<std::span<const float>> factors;
  for (int i : ids) factors.push_back(stack[i].values());
  constexpr double kFloatMax = std::numeric_limits<float>::max();
  for (std::size_t n = 0; n < out.size(); ++n) {
    double prod = 1.0;
    for (const auto& f : factors) prod *= std::max(0.0, static_cast<double>(f[n]));
    out[n] = static_cast<float>(std::min(prod, kFloatMax));
  }
  if (normalize_output) normalize_min_max(out);
  return out;
}

/// max(v) - v, mapping dark curves on a bright background to bright curves.
inline Volume invert_intensity(const Volume& vol) {
  Volume out = vol;
  auto v = out.values();
  const float hi = *std::max_element(v.begin(), v.end());
  for (float& x : v) x = hi - x;
  return out;
}

struct StageTiming {
  std::string stage;
  double seconds = 0;
};

struct PipelineResult {
  Volume enhanced;
  MeasureStack stack;
  std::vector<StageTiming> timings;
};

/// Full transform with an explicit direction set (dimensionality must match
/// the volume): line sweep (orientation field, w1/w3/w5), alignment sweep
/// over the stored field (w2/w4/w6), then combination.
inline PipelineResult run_pipeline(const Volume& input, const DirectionSet& dirs, const PipelineConfig& cfg) {
  cfg.validate();
  if (!input.all_finite()) throw InvalidArgument("input volume contains non-finite values");
  using clock = std::chrono::steady_clock;
  std::vector<StageTiming> timings;
  auto timed = [&](const char* name, auto&& fn) {
    const auto t0 = clock::now();
    auto r = fn();
    timings.push_back({name, std::chrono::duration<double>(clock::now() - t0).count()});
    return r;
  };

  const Volume vol = cfg.invert ? invert_intensity(input) : input;
  const IntegralParams params = cfg.integral_params();
  auto line = timed("line_sweep", [&] { return line_measures(vol, dirs, params); });
  auto align = timed("alignment_sweep", [&] { return alignment_measures(line.field, dirs, params); });
  MeasureStack stack = assemble(std::move(line), std::move(align));
  Volume enhanced = timed("combine", [&] { return combine(stack, cfg.mode, cfg.normalize_output); });
  return {std::move(enhanced), std::move(stack), std::move(timings)};
}

/// Full transform with the default direction set for the volume
/// (k_directions entries, or 36/96 for 2D/3D when zero).
inline PipelineResult run_pipeline(const Volume& input, const PipelineConfig& cfg) {
  cfg.validate();
  return run_pipeline(input, default_directions(input.dims(), cfg.k_directions), cfg);
}

}  // namespace oft
