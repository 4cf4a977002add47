#pragma once

// Command-line driver. Every command that writes artifacts also writes a
// JSON manifest; `oft rerun <manifest>` replays the recorded arguments.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "oft/oft.hpp"

namespace oft::cli {

inline constexpr const char* kToolVersion = "1.0.0";

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_manifest(const std::filesystem::path& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create manifest " + path.string());
  out << j.dump(2) << "\n";
}

inline ordered_json manifest_head(const std::string& command, const std::vector<std::string>& argv) {
  ordered_json j;
  j["tool"] = "oft";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["argv"] = argv;
  return j;
}

inline std::filesystem::path default_manifest(const std::filesystem::path& output) {
  auto base = output;
  if (base.extension() == ".json" || base.extension() == ".raw") base.replace_extension();
  return base.string() + ".manifest.json";
}

inline ordered_json timings_json(const std::vector<StageTiming>& t) {
  ordered_json j = ordered_json::object();
  for (const auto& s : t) j[s.stage] = s.seconds;
  return j;
}

}  // namespace detail

struct EnhanceOptions {
  std::string input, output, manifest;
  double epsilon = 6.0;
  int directions = 0;
  std::string mode = "no-mean-align";
  double step = 1.0;
  bool invert = false;
  bool normalize = false;
  unsigned threads = 0;
  bool debug_measures = false;

  PipelineConfig config() const {
    PipelineConfig c;
    c.epsilon = epsilon;
    c.k_directions = directions;
    c.mode = parse_combine_mode(mode);
    c.step_hint = step;
    c.invert = invert;
    c.normalize_output = normalize;
    return c;
  }

  std::vector<std::string> canonical_argv() const {
    std::vector<std::string> a{"enhance", input, "-o", output, "--epsilon", detail::fmt_double(epsilon),
                               "--directions", std::to_string(directions), "--mode", mode,
                               "--step", detail::fmt_double(step)};
    if (invert) a.push_back("--invert");
    if (normalize) a.push_back("--normalize");
    if (debug_measures) a.push_back("--debug-measures");
    if (!manifest.empty()) a.insert(a.end(), {"--manifest", manifest});
    return a;
  }
};

inline int cmd_enhance(const EnhanceOptions& o, std::ostream& log) {
  if (o.threads > 0) set_thread_count(o.threads);
  const PipelineConfig cfg = o.config();
  const Volume vol = read_volume(o.input);
  const DirectionSet dirs = default_directions(vol.dims(), cfg.k_directions);
  const auto result = run_pipeline(vol, dirs, cfg);
  write_volume(result.enhanced, o.output);

  ordered_json outputs;
  outputs["enhanced"] = VolumePaths::from(o.output).header.string();
  if (o.debug_measures) {
    const auto base = VolumePaths::from(o.output).header;
    for (int i = 1; i <= 6; ++i) {
      auto p = base;
      p.replace_extension();
      const std::string name = p.string() + ".w" + std::to_string(i);
      write_volume(result.stack[i], name);
      outputs["w" + std::to_string(i)] = name + ".json";
    }
  }
  ordered_json m = detail::manifest_head("enhance", o.canonical_argv());
  ordered_json c;
  c["epsilon"] = cfg.epsilon;
  c["k_directions"] = dirs.count();
  c["direction_set"] = dirs.dim() == 2 ? "half-circle-uniform" : "fibonacci-hemisphere";
  c["mode"] = std::string(to_string(cfg.mode));
  c["step_hint"] = cfg.step_hint;
  c["invert"] = cfg.invert;
  c["normalize_output"] = cfg.normalize_output;
  m["config"] = c;
  m["input"] = o.input;
  m["outputs"] = outputs;
  m["dims"] = {vol.dims().nx, vol.dims().ny, vol.dims().nz};
  m["threads"] = thread_count();
  m["timings_s"] = detail::timings_json(result.timings);
  const auto manifest = o.manifest.empty() ? detail::default_manifest(o.output) : std::filesystem::path(o.manifest);
  detail::write_manifest(manifest, m);
  log << "enhanced " << to_string(vol.dims()) << " with " << dirs.count() << " directions, mode "
      << to_string(cfg.mode) << " -> " << outputs["enhanced"].get<std::string>() << "\n";
  return 0;
}

struct SynthOptions {
  std::string output;
  std::vector<int> dims{96, 96, 96};
  bool two_d = false;
  double amplitude = 0.75, thickness = 4.0, noise = 0.25, clutter = 0.02, clutter_radius = 1.0;
  std::uint64_t seed = 1;

  std::vector<std::string> canonical_argv() const {
    std::vector<std::string> a{"synth", "-o", output, "--dims"};
    for (int d : dims) a.push_back(std::to_string(d));
    if (two_d) a.push_back("--2d");
    a.insert(a.end(), {"--amplitude", detail::fmt_double(amplitude), "--thickness", detail::fmt_double(thickness),
                       "--noise", detail::fmt_double(noise), "--clutter", detail::fmt_double(clutter),
                       "--clutter-radius", detail::fmt_double(clutter_radius), "--seed", std::to_string(seed)});
    return a;
  }
};

inline int cmd_synth(const SynthOptions& o, std::ostream& log) {
  if (o.dims.size() < 2 || o.dims.size() > 3) throw InvalidArgument("--dims takes 2 or 3 values");
  SynthParams p;
  p.dims = {o.dims[0], o.dims[1], o.dims.size() == 3 ? o.dims[2] : 1};
  p.curve_amplitude = o.amplitude;
  p.curve_thickness = o.thickness;
  p.noise_sigma = o.noise;
  p.clutter_density = o.clutter;
  p.clutter_radius = o.clutter_radius;
  p.seed = o.seed;
  const SynthVolume s = (o.two_d || p.dims.is_2d()) ? make_curve_image_2d(p) : make_curve_volume(p);
  write_volume(s.image, o.output);
  const auto paths = VolumePaths::from(o.output);
  write_raw_f32(paths.companion("truth"), s.truth);

  ordered_json m = detail::manifest_head("synth", o.canonical_argv());
  m["seed"] = o.seed;
  m["dims"] = {s.image.dims().nx, s.image.dims().ny, s.image.dims().nz};
  m["outputs"] = {{"image", paths.header.string()}, {"truth", paths.companion("truth").string()}};
  detail::write_manifest(detail::default_manifest(o.output), m);
  log << "wrote " << to_string(s.image.dims()) << " synthetic volume to " << paths.header.string() << "\n";
  return 0;
}

struct ThresholdOptions {
  std::string input, output;
  std::optional<double> value, percentile;
  bool slice_median = false;
  std::optional<double> median_target;

  std::vector<std::string> canonical_argv() const {
    std::vector<std::string> a{"threshold", input, "-o", output};
    if (value) a.insert(a.end(), {"--value", detail::fmt_double(*value)});
    if (percentile) a.insert(a.end(), {"--percentile", detail::fmt_double(*percentile)});
    if (slice_median) a.push_back("--slice-median");
    if (median_target) a.insert(a.end(), {"--median-target", detail::fmt_double(*median_target)});
    return a;
  }
};

inline int cmd_threshold(const ThresholdOptions& o, std::ostream& log) {
  if (o.value.has_value() == o.percentile.has_value())
    throw InvalidArgument("give exactly one of --value or --percentile");
  Volume vol = read_volume(o.input);
  if (o.slice_median || o.median_target) vol = normalize_slice_median(vol, o.median_target);
  const double t = o.value ? *o.value : percentile_value(vol, *o.percentile);
  const Volume bin = threshold(vol, t);
  write_volume(bin, o.output);
  std::size_t ones = 0;
  for (float v : bin.values()) ones += v > 0;
  ordered_json m = detail::manifest_head("threshold", o.canonical_argv());
  m["input"] = o.input;
  m["threshold"] = t;
  m["ones"] = ones;
  m["outputs"] = {{"binary", VolumePaths::from(o.output).header.string()}};
  detail::write_manifest(detail::default_manifest(o.output), m);
  log << "threshold " << t << ": " << ones << " of " << bin.size() << " voxels set\n";
  return 0;
}

struct SkeletonOptions {
  std::string input, output, rasterize;
  double distance = 1.0;
  std::vector<int> dims;

  std::vector<std::string> canonical_argv() const {
    std::vector<std::string> a{"skeleton-denoise", input, "-o", output, "--distance", detail::fmt_double(distance)};
    if (!rasterize.empty()) {
      a.insert(a.end(), {"--rasterize", rasterize, "--dims"});
      for (int d : dims) a.push_back(std::to_string(d));
    }
    return a;
  }
};

inline int cmd_skeleton_denoise(const SkeletonOptions& o, std::ostream& log) {
  const SkeletonGraph g = read_skeleton(o.input);
  const MergeReport r = merge_skeleton_nodes_report(g, o.distance);
  write_skeleton(r.graph, o.output);
  ordered_json m = detail::manifest_head("skeleton-denoise", o.canonical_argv());
  m["input"] = o.input;
  m["distance"] = o.distance;
  m["passes"] = r.passes;
  m["nodes_before"] = g.node_count();
  m["nodes_after"] = r.graph.node_count();
  ordered_json outputs{{"graph", o.output}};
  if (!o.rasterize.empty()) {
    if (o.dims.size() != 3) throw InvalidArgument("--rasterize needs --dims nx ny nz");
    write_volume(rasterize_skeleton(r.graph, {o.dims[0], o.dims[1], o.dims[2]}), o.rasterize);
    outputs["raster"] = VolumePaths::from(o.rasterize).header.string();
  }
  m["outputs"] = outputs;
  detail::write_manifest(detail::default_manifest(o.output), m);
  log << "merged " << g.node_count() << " -> " << r.graph.node_count() << " nodes in " << r.passes << " passes\n";
  return 0;
}

struct InfoOptions {
  std::string input, pgm;
  int slice = -1;
};

inline int cmd_info(const InfoOptions& o, std::ostream& log) {
  const Volume vol = read_volume(o.input);
  const auto v = vol.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double sum = 0;
  for (float x : v) sum += x;
  ordered_json j;
  j["dims"] = {vol.dims().nx, vol.dims().ny, vol.dims().nz};
  j["voxels"] = vol.size();
  j["min"] = *lo;
  j["max"] = *hi;
  j["mean"] = sum / static_cast<double>(vol.size());
  j["median"] = median_of(std::vector<double>(v.begin(), v.end()));
  log << j.dump(2) << "\n";
  if (!o.pgm.empty()) write_pgm_slice(vol, o.slice >= 0 ? o.slice : vol.dims().nz / 2, o.pgm);
  return 0;
}

struct BenchOptions {
  int size = 64;
  int directions = 48;
  double epsilon = 6.0;
  double step = 1.0;
  unsigned threads = 0;
  std::uint64_t seed = 1;
};

inline int cmd_bench(const BenchOptions& o, std::ostream& log) {
  if (o.threads > 0) set_thread_count(o.threads);
  SynthParams sp;
  sp.dims = {o.size, o.size, o.size};
  sp.seed = o.seed;
  const Volume vol = make_curve_volume(sp).image;
  const DirectionSet dirs = directions_3d(o.directions);
  const IntegralParams params{o.epsilon, o.step};
  const double voxels = static_cast<double>(vol.size());
  using clock = std::chrono::steady_clock;
  auto seconds = [](auto t0) { return std::chrono::duration<double>(clock::now() - t0).count(); };

  log << "bench " << to_string(vol.dims()) << ", K=" << dirs.count() << ", epsilon=" << o.epsilon
      << ", threads=" << thread_count() << "\n";
  auto t0 = clock::now();
  auto line = line_measures(vol, dirs, params);
  const double t_line = seconds(t0);
  t0 = clock::now();
  auto align = alignment_measures(line.field, dirs, params);
  const double t_align = seconds(t0);
  MeasureStack stack = assemble(std::move(line), std::move(align));
  t0 = clock::now();
  const Volume out = combine(stack, CombineMode::NoMeanAlign);
  const double t_comb = seconds(t0);

  // w1/w3/w5 share the line sweep and w2/w4/w6 the alignment sweep
  const char* names[6] = {"w1 max line integral", "w2 max alignment integral", "w3 mean line integral",
                          "w4 mean alignment integral", "w5 deviation line integral",
                          "w6 deviation alignment integral"};
  for (int i = 0; i < 6; ++i) {
    const double t = i % 2 == 0 ? t_line : t_align;
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-34s %9.3f s  %12.0f voxels/s (shared sweep)\n", names[i], t, voxels / t);
    log << buf;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "  %-34s %9.3f s  %12.0f voxels/s\n", "combine", t_comb, voxels / std::max(t_comb, 1e-9));
  log << buf;
  std::snprintf(buf, sizeof buf, "  %-34s %9.3f s  %12.0f voxels/s\n", "total", t_line + t_align + t_comb,
                voxels / (t_line + t_align + t_comb));
  log << buf;
  (void)out;
  return 0;
}

inline int run(const std::vector<std::string>& args, std::ostream& log = std::cout, std::ostream& err = std::cerr);

inline int cmd_rerun(const std::string& manifest, std::ostream& log, std::ostream& err) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest);
  const auto j = nlohmann::json::parse(in);
  if (!j.contains("argv")) throw IoError("manifest has no argv");
  return run(j["argv"].get<std::vector<std::string>>(), log, err);
}

/// Parses and dispatches. args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& log, std::ostream& err) {
  CLI::App app{"Orientation field transform: curve enhancement for 2D/3D volumes", "oft"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  EnhanceOptions eo;
  auto* enhance = app.add_subcommand("enhance", "Enhance curve-like structures in a volume");
  enhance->add_option("input", eo.input, "Input volume (.json/.raw pair or .mrc)")->required();
  enhance->add_option("-o,--output", eo.output, "Output volume base name")->required();
  enhance->add_option("--epsilon", eo.epsilon, "Integration path length in voxels (about 1.5x curve thickness)")
      ->check(CLI::PositiveNumber);
  enhance->add_option("--directions", eo.directions, "Number of directions (0: 36 in 2D, 96 in 3D)")
      ->check(CLI::NonNegativeNumber);
  enhance->add_option("--mode", eo.mode, "Measure combination")
      ->check(CLI::IsMember({"all", "no-mean-align", "line-pair"}));
  enhance->add_option("--step", eo.step, "Sample spacing along each path")->check(CLI::PositiveNumber);
  enhance->add_flag("--invert", eo.invert, "Treat dark curves on a bright background");
  enhance->add_flag("--normalize", eo.normalize, "Min-max scale the output to [0, 1]");
  enhance->add_option("--threads", eo.threads, "Worker threads (default: OFT_THREADS or all cores)");
  enhance->add_flag("--debug-measures", eo.debug_measures, "Also write the six measure volumes");
  enhance->add_option("--manifest", eo.manifest, "Manifest path (default: <output>.manifest.json)");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic curve volume with ground truth");
  synth->add_option("-o,--output", so.output, "Output volume base name")->required();
  synth->add_option("--dims", so.dims, "nx ny [nz]")->expected(2, 3);
  synth->add_flag("--2d", so.two_d, "Generate the 2D image variant");
  synth->add_option("--amplitude", so.amplitude, "Curve extent as a fraction of the half-size");
  synth->add_option("--thickness", so.thickness, "Tube diameter in voxels");
  synth->add_option("--noise", so.noise, "Gaussian noise sigma");
  synth->add_option("--clutter", so.clutter, "Fraction of voxels covered by clutter blobs");
  synth->add_option("--clutter-radius", so.clutter_radius, "Clutter blob radius in voxels");
  synth->add_option("--seed", so.seed, "Random seed");

  ThresholdOptions to;
  auto* thr = app.add_subcommand("threshold", "Hard-threshold a volume into a binary mask");
  thr->add_option("input", to.input, "Input volume")->required();
  thr->add_option("-o,--output", to.output, "Output volume base name")->required();
  thr->add_option("--value", to.value, "Absolute threshold (voxels > value become 1)");
  thr->add_option("--percentile", to.percentile, "Threshold at this percentile of the values")
      ->check(CLI::Range(0.0, 100.0));
  thr->add_flag("--slice-median", to.slice_median, "Scale every z-slice to a common median first");
  thr->add_option("--median-target", to.median_target, "Common median (default: median of slice medians)");

  SkeletonOptions ko;
  auto* skel = app.add_subcommand("skeleton-denoise", "Merge close skeleton nodes and redraw straight edges");
  skel->add_option("input", ko.input, "Skeleton graph JSON")->required();
  skel->add_option("-o,--output", ko.output, "Output graph JSON")->required();
  skel->add_option("--distance", ko.distance, "Merge distance in voxels")->check(CLI::PositiveNumber);
  skel->add_option("--rasterize", ko.rasterize, "Also write a binary volume with Bresenham edges");
  skel->add_option("--dims", ko.dims, "Raster dims nx ny nz")->expected(3);

  InfoOptions io;
  auto* info = app.add_subcommand("info", "Print volume statistics");
  info->add_option("input", io.input, "Input volume")->required();
  info->add_option("--pgm", io.pgm, "Export a z-slice as 8-bit PGM");
  info->add_option("--slice", io.slice, "Slice index for --pgm (default: middle)");

  BenchOptions bo;
  auto* bench = app.add_subcommand("bench", "Time each stage on a synthetic cube");
  bench->add_option("--size", bo.size, "Edge length of the cube")->check(CLI::PositiveNumber);
  bench->add_option("--directions", bo.directions, "Number of 3D directions")->check(CLI::PositiveNumber);
  bench->add_option("--epsilon", bo.epsilon, "Path length")->check(CLI::PositiveNumber);
  bench->add_option("--step", bo.step, "Sample spacing")->check(CLI::PositiveNumber);
  bench->add_option("--threads", bo.threads, "Worker threads");
  bench->add_option("--seed", bo.seed, "Seed for the synthetic cube");

  std::string manifest;
  auto* rerun = app.add_subcommand("rerun", "Replay a command from its manifest");
  rerun->add_option("manifest", manifest, "Manifest JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, log, err);
  }

  try {
    if (*enhance) return cmd_enhance(eo, log);
    if (*synth) return cmd_synth(so, log);
    if (*thr) return cmd_threshold(to, log);
    if (*skel) return cmd_skeleton_denoise(ko, log);
    if (*info) return cmd_info(io, log);
    if (*bench) return cmd_bench(bo, log);
    if (*rerun) return cmd_rerun(manifest, log, err);
  } catch (const std::exception& e) {
    err << "oft: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace oft::cli
