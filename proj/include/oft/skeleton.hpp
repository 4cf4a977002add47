#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "volume.hpp"

namespace oft {

/// Undirected graph with real-valued voxel coordinates per node.
/// Edges are stored as (lower id, higher id); no self-loops, no duplicates.
class SkeletonGraph {
 public:
  using Edge = std::pair<int, int>;

  void add_node(int id, Vec3 xyz) {
    if (!nodes_.emplace(id, xyz).second) throw InvalidArgument("duplicate node id " + std::to_string(id));
  }

  /// Adds an undirected edge. Self-loops are ignored; duplicates collapse.
  void add_edge(int a, int b) {
    if (!nodes_.contains(a) || !nodes_.contains(b))
      throw InvalidArgument("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") references a missing node");
    if (a == b) return;
    edges_.insert(std::minmax(a, b));
  }

  const std::map<int, Vec3>& nodes() const { return nodes_; }
  const std::set<Edge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  friend bool operator==(const SkeletonGraph&, const SkeletonGraph&) = default;

 private:
  std::map<int, Vec3> nodes_;
  std::set<Edge> edges_;
};

inline SkeletonGraph skeleton_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array())
    throw IoError("skeleton graph: missing \"nodes\" array");
  SkeletonGraph g;
  try {
    for (const auto& n : j["nodes"]) {
      const auto& xyz = n.at("xyz");
      if (!xyz.is_array() || xyz.size() != 3) throw IoError("skeleton graph: node xyz must have 3 entries");
      g.add_node(n.at("id").get<int>(), {xyz[0].get<double>(), xyz[1].get<double>(), xyz[2].get<double>()});
    }
    if (j.contains("edges")) {
      for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2) throw IoError("skeleton graph: edges must be [id, id] pairs");
        g.add_edge(e[0].get<int>(), e[1].get<int>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("skeleton graph: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("skeleton graph: ") + e.what());
  }
  return g;
}

inline nlohmann::ordered_json skeleton_to_json(const SkeletonGraph& g) {
  nlohmann::ordered_json j;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& [id, p] : g.nodes()) {
    nlohmann::ordered_json n;
    n["id"] = id;
    n["xyz"] = {p.x, p.y, p.z};
    j["nodes"].push_back(std::move(n));
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& [a, b] : g.edges()) j["edges"].push_back({a, b});
  return j;
}

inline SkeletonGraph read_skeleton(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("skeleton graph " + path.string() + ": " + e.what());
  }
  return skeleton_from_json(j);
}

inline void write_skeleton(const SkeletonGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out << skeleton_to_json(g).dump(2) << "\n";
}

struct MergeReport {
  SkeletonGraph graph;
  int passes = 0;  ///< passes that changed the graph
};

/// One clustering pass: single-linkage clusters of nodes closer than d are
/// collapsed to their centroid, keeping the smallest id of each cluster.
/// Returns false when no two nodes were closer than d.
inline bool merge_pass(SkeletonGraph& g, double d) {
  std::vector<int> ids;
  std::vector<Vec3> pos;
  for (const auto& [id, p] : g.nodes()) {
    ids.push_back(id);
    pos.push_back(p);
  }
  const std::size_t n = ids.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  bool any = false;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (norm(pos[a] - pos[b]) < d) {
        any = true;
        const std::size_t ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
  if (!any) return false;

  // roots are the lowest index (= lowest id) of each cluster
  std::vector<Vec3> sum(n);
  std::vector<int> members(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t r = find(a);
    sum[r] = sum[r] + pos[a];
    ++members[r];
  }
  SkeletonGraph merged;
  for (std::size_t a = 0; a < n; ++a)
    if (find(a) == a) merged.add_node(ids[a], (1.0 / members[a]) * sum[a]);
  std::map<int, int> rep;
  for (std::size_t a = 0; a < n; ++a) rep[ids[a]] = ids[find(a)];
  for (const auto& [a, b] : g.edges()) merged.add_edge(rep[a], rep[b]);
  g = std::move(merged);
  return true;
}

/// Repeats merge_pass until no pair of nodes is closer than d.
inline MergeReport merge_skeleton_nodes_report(SkeletonGraph g, double d) {
  if (!(d > 0) || !std::isfinite(d)) throw InvalidArgument("merge distance must be positive");
  MergeReport report;
  while (merge_pass(g, d)) ++report.passes;
  report.graph = std::move(g);
  return report;
}

inline SkeletonGraph merge_skeleton_nodes(const SkeletonGraph& g, double d) {
  return merge_skeleton_nodes_report(g, d).graph;
}

struct Voxel {
  int x = 0, y = 0, z = 0;
  friend constexpr bool operator==(Voxel, Voxel) = default;
};

/// 3D Bresenham line from a to b, both endpoints included. Consecutive
/// voxels differ by at most one step per axis.
inline std::vector<Voxel> bresenham_3d(Voxel a, Voxel b) {
  const std::array<int, 3> from{a.x, a.y, a.z}, to{b.x, b.y, b.z};
  std::array<int, 3> delta{}, step{};
  for (int i = 0; i < 3; ++i) {
    delta[i] = std::abs(to[i] - from[i]);
    step[i] = to[i] < from[i] ? -1 : 1;
  }
  const int major = delta[0] >= delta[1] && delta[0] >= delta[2] ? 0 : (delta[1] >= delta[2] ? 1 : 2);
  const int m1 = (major + 1) % 3, m2 = (major + 2) % 3;

  std::vector<Voxel> out;
  out.reserve(static_cast<std::size_t>(delta[major]) + 1);
  std::array<int, 3> p = from;
  int err1 = 2 * delta[m1] - delta[major];
  int err2 = 2 * delta[m2] - delta[major];
  for (int n = 0; n < delta[major]; ++n) {
    out.push_back({p[0], p[1], p[2]});
    if (err1 > 0) {
      p[m1] += step[m1];
      err1 -= 2 * delta[major];
    }
    if (err2 > 0) {
      p[m2] += step[m2];
      err2 -= 2 * delta[major];
    }
    err1 += 2 * delta[m1];
    err2 += 2 * delta[m2];
    p[major] += step[major];
  }
  out.push_back({to[0], to[1], to[2]});
  return out;
}

/// Rounds node coordinates (half away from zero) and draws every edge as a
/// Bresenham line into a binary volume.
inline Volume rasterize_skeleton(const SkeletonGraph& g, Dims dims) {
  Volume out(dims);
  std::map<int, Voxel> voxel;
  for (const auto& [id, p] : g.nodes()) {
    const double rx = std::round(p.x), ry = std::round(p.y), rz = std::round(p.z);
    if (!(rx >= 0 && ry >= 0 && rz >= 0 && rx < dims.nx && ry < dims.ny && rz < dims.nz))
      throw InvalidArgument("node " + std::to_string(id) + " lies outside the " + to_string(dims) + " grid");
    const Voxel v{static_cast<int>(rx), static_cast<int>(ry), static_cast<int>(rz)};
    voxel[id] = v;
    out(v.x, v.y, v.z) = 1.0f;
  }
  for (const auto& [a, b] : g.edges())
    for (const Voxel v : bresenham_3d(voxel[a], voxel[b])) out(v.x, v.y, v.z) = 1.0f;
  return out;
}

}  // namespace oft
