#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "oft_cli.hpp"

namespace oft {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("oft_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    set_thread_count(0);
    fs::remove_all(dir_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  static std::string bytes(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(Cli, SynthEnhanceManifestAndRerun) {
  ASSERT_EQ(run({"synth", "-o", path("img"), "--dims", "24", "24", "24", "--thickness", "3", "--seed", "9"}), 0);
  EXPECT_TRUE(fs::exists(path("img.json")));
  EXPECT_TRUE(fs::exists(path("img.raw")));
  EXPECT_TRUE(fs::exists(path("img.truth.raw")));
  ASSERT_EQ(run({"enhance", path("img.json"), "-o", path("out"), "--epsilon", "4.5", "--directions", "24",
                 "--debug-measures"}),
            0)
      << err_.str();
  const auto manifest_path = path("out.manifest.json");
  ASSERT_TRUE(fs::exists(manifest_path));
  std::ifstream in(manifest_path);
  const auto m = nlohmann::json::parse(in);
  for (const char* key : {"tool", "version", "command", "argv", "config", "input", "outputs", "dims", "threads", "timings_s"})
    EXPECT_TRUE(m.contains(key)) << key;
  EXPECT_EQ(m["config"]["k_directions"], 24);
  EXPECT_EQ(m["config"]["mode"], "no-mean-align");
  for (int i = 1; i <= 6; ++i) EXPECT_TRUE(fs::exists(path("out.w" + std::to_string(i) + ".raw")));

  const std::string first = bytes(path("out.raw"));
  fs::remove(path("out.raw"));
  ASSERT_EQ(run({"rerun", manifest_path}), 0) << err_.str();
  EXPECT_EQ(bytes(path("out.raw")), first);
}

TEST_F(Cli, ThreadCountDoesNotChangeBytes) {
  ASSERT_EQ(run({"synth", "-o", path("img"), "--dims", "20", "20", "20", "--thickness", "3"}), 0);
  ASSERT_EQ(run({"enhance", path("img"), "-o", path("a"), "--epsilon", "4.5", "--directions", "16", "--threads", "1"}), 0);
  ASSERT_EQ(run({"enhance", path("img"), "-o", path("b"), "--epsilon", "4.5", "--directions", "16", "--threads", "8"}), 0);
  EXPECT_EQ(bytes(path("a.raw")), bytes(path("b.raw")));
}

TEST_F(Cli, TwoDimensionalEnhance) {
  ASSERT_EQ(run({"synth", "-o", path("img"), "--dims", "48", "48", "--thickness", "3"}), 0);
  ASSERT_EQ(run({"enhance", path("img"), "-o", path("out"), "--epsilon", "4.5", "--normalize"}), 0) << err_.str();
  const Volume out = read_volume(path("out"));
  EXPECT_EQ(out.dims().nz, 1);
  EXPECT_EQ(*std::max_element(out.values().begin(), out.values().end()), 1.0f);
  std::ifstream in(path("out.manifest.json"));
  EXPECT_EQ(nlohmann::json::parse(in)["config"]["k_directions"], 36);
}

TEST_F(Cli, PercentileThreshold) {
  ASSERT_EQ(run({"synth", "-o", path("img"), "--dims", "30", "30", "30"}), 0);
  ASSERT_EQ(run({"threshold", path("img"), "-o", path("bin"), "--percentile", "99"}), 0) << err_.str();
  const Volume bin = read_volume(path("bin"));
  double ones = 0;
  for (float x : bin.values()) {
    EXPECT_TRUE(x == 0.0f || x == 1.0f);
    ones += x;
  }
  EXPECT_LE(ones, 0.01 * bin.size());
  EXPECT_GT(ones, 0.0);
  ASSERT_EQ(run({"threshold", path("img"), "-o", path("bin2"), "--value", "0.5", "--slice-median"}), 0);
  EXPECT_NE(run({"threshold", path("img"), "-o", path("bin3")}), 0);
  EXPECT_NE(run({"threshold", path("img"), "-o", path("bin3"), "--value", "1", "--percentile", "50"}), 0);
}

TEST_F(Cli, SkeletonDenoise) {
  {
    std::ofstream g(path("g.json"));
    g << R"({"nodes":[{"id":1,"xyz":[2,2,2]},{"id":2,"xyz":[2.5,2,2]},{"id":3,"xyz":[8,2,2]}],"edges":[[1,2],[2,3]]})";
  }
  ASSERT_EQ(run({"skeleton-denoise", path("g.json"), "-o", path("m.json"), "--distance", "1", "--rasterize",
                 path("r"), "--dims", "12", "6", "6"}),
            0)
      << err_.str();
  const auto m = read_skeleton(path("m.json"));
  EXPECT_EQ(m.node_count(), 2u);
  EXPECT_EQ(m.nodes().at(1).x, 2.25);
  const Volume r = read_volume(path("r"));
  for (int i = 2; i <= 8; ++i) EXPECT_EQ(r(i, 2, 2), 1.0f);

  {
    std::ofstream g(path("two.json"));
    g << R"({"nodes":[{"id":1,"xyz":[0,0,0]},{"id":2,"xyz":[0.5,0,0]}],"edges":[[1,2]]})";
  }
  ASSERT_EQ(run({"skeleton-denoise", path("two.json"), "-o", path("one.json"), "--distance", "1"}), 0);
  EXPECT_EQ(read_skeleton(path("one.json")).node_count(), 1u);
}

TEST_F(Cli, InfoAndPgm) {
  ASSERT_EQ(run({"synth", "-o", path("img"), "--dims", "16", "16", "8"}), 0);
  ASSERT_EQ(run({"info", path("img"), "--pgm", path("s.pgm")}), 0);
  const auto j = nlohmann::json::parse(out_.str());
  EXPECT_EQ(j["voxels"], 16 * 16 * 8);
  EXPECT_EQ(bytes(path("s.pgm")).substr(0, 2), "P5");
}

TEST_F(Cli, BenchReportsEveryMeasure) {
  ASSERT_EQ(run({"bench", "--size", "64", "--directions", "48", "--epsilon", "6"}), 0) << err_.str();
  const std::string report = out_.str();
  for (const char* w : {"w1", "w2", "w3", "w4", "w5", "w6", "combine", "total", "voxels/s"})
    EXPECT_NE(report.find(w), std::string::npos) << w;
}

// Diamond network of tubes (radius 1, cubic cell 12 voxels) with noise,
// a stand-in for a dense bicontinuous phase.
Volume diamond_network(int n, Volume& truth) {
  const double a = 12.0, radius = 1.0;
  const double fcc[4][3] = {{0, 0, 0}, {0, .5, .5}, {.5, 0, .5}, {.5, .5, 0}};
  const double bond[4][3] = {{.25, .25, .25}, {-.25, -.25, .25}, {-.25, .25, -.25}, {.25, -.25, -.25}};
  truth = Volume({n, n, n});
  const int cells = static_cast<int>(n / a) + 2;
  for (int cz = -1; cz < cells; ++cz)
    for (int cy = -1; cy < cells; ++cy)
      for (int cx = -1; cx < cells; ++cx)
        for (const auto& f : fcc)
          for (const auto& d : bond) {
            const Vec3 p{(cx + f[0]) * a, (cy + f[1]) * a, (cz + f[2]) * a};
            const Vec3 q = p + a * Vec3{d[0], d[1], d[2]};
            for (int k = std::max(0, int(std::min(p.z, q.z) - 2)); k <= std::min(n - 1, int(std::max(p.z, q.z) + 2)); ++k)
              for (int j = std::max(0, int(std::min(p.y, q.y) - 2)); j <= std::min(n - 1, int(std::max(p.y, q.y) + 2)); ++j)
                for (int i = std::max(0, int(std::min(p.x, q.x) - 2)); i <= std::min(n - 1, int(std::max(p.x, q.x) + 2)); ++i)
                  if (detail::segment_distance({double(i), double(j), double(k)}, p, q) <= radius) truth(i, j, k) = 1.0f;
          }
  Volume v = truth;
  CounterRng rng(17);
  for (float& x : v.values()) x = static_cast<float>(x + 0.5 * rng.normal());
  return v;
}

// Probability that a random curve voxel outscores a random background voxel.
double rank_separation(const Volume& out, const Volume& truth) {
  std::vector<std::pair<float, bool>> v;
  for (std::size_t n = 0; n < out.size(); ++n) v.push_back({out[n], truth[n] > 0});
  std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  double rank_sum = 0, pos = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j].first == v[i].first) ++j;
    const double mid_rank = (i + j + 1) / 2.0;
    for (std::size_t t = i; t < j; ++t)
      if (v[t].second) rank_sum += mid_rank, pos += 1;
    i = j;
  }
  const double neg = v.size() - pos;
  return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

TEST_F(Cli, LinePairSeparatesDenseNetworkBetterThanAll) {
  Volume truth;
  write_volume(diamond_network(32, truth), path("network"));
  auto separation = [&](const std::string& mode) {
    EXPECT_EQ(run({"enhance", path("network"), "-o", path(mode), "--epsilon", "3", "--directions", "48", "--mode", mode}), 0);
    const Volume out = read_volume(path(mode));
    double on = 0, off = 0;
    int n_on = 0, n_off = 0;
    for (std::size_t n = 0; n < out.size(); ++n)
      if (truth[n] > 0) on += out[n], ++n_on;
      else off += out[n], ++n_off;
    RecordProperty(mode + "_mean_ratio", std::to_string((on / n_on) / (off / n_off)));
    return rank_separation(out, truth);
  };
  const double line_pair = separation("line-pair");
  const double all = separation("all");
  // measured: line-pair 0.9857, all 0.5185
  EXPECT_GE(line_pair, 0.95);
  EXPECT_GT(line_pair, all + 0.3);
}

TEST_F(Cli, ErrorsExitNonZero) {
  EXPECT_NE(run({"enhance", path("missing.json"), "-o", path("x")}), 0);
  EXPECT_NE(err_.str().find("oft: error:"), std::string::npos);
  EXPECT_NE(run({"frobnicate"}), 0);
  EXPECT_NE(run({}), 0);
  ASSERT_EQ(run({"synth", "-o", path("img"), "--dims", "8", "8", "8"}), 0);
  EXPECT_NE(run({"enhance", path("img"), "-o", path("x"), "--mode", "sum"}), 0);
  EXPECT_NE(run({"enhance", path("img"), "-o", path("x"), "--epsilon", "-2"}), 0);
  EXPECT_EQ(run({"--version"}), 0);
}

}  // namespace
}  // namespace oft
