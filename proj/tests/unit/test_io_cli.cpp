#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "raysamp/cli.hpp"
#include "raysamp/io.hpp"
#include "raysamp/probmap.hpp"
#include "raysamp/rng.hpp"
#include "raysamp/scene.hpp"

#ifndef RAYSAMP_SCENE_DIR
#error "RAYSAMP_SCENE_DIR must point at the shipped scenes"
#endif

namespace raysamp {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("raysamp_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "raysamp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kScene = std::string(RAYSAMP_SCENE_DIR) + "/default.json";

using Pfm = TempDir;

TEST_F(Pfm, RoundTripIsBitwiseAfterFloatNarrowing) {
  Rng rng(1);
  Map2D m(13, 7);
  for (double& x : m.values()) x = static_cast<float>(rng.uniform() * 10 - 5);
  write_pfm(path("m.pfm"), m);
  EXPECT_EQ(read_pfm(path("m.pfm")), m);
  const std::string bytes = slurp(path("m.pfm"));
  EXPECT_EQ(bytes.substr(0, 13), "Pf\n13 7\n-1.0\n");
  EXPECT_EQ(bytes.size(), 13 + 13 * 7 * 4u);
}

TEST_F(Pfm, BottomRowComesFirst) {
  Map2D m(2, 2);
  m.at(0, 1) = 7.0f;
  write_pfm(path("m.pfm"), m);
  const std::string bytes = slurp(path("m.pfm"));
  const auto payload = bytes.find("-1.0\n") + 5;
  ASSERT_EQ(bytes.size(), payload + 16);
  float first;
  std::memcpy(&first, bytes.data() + payload, 4);
  EXPECT_EQ(first, 7.0f);
}

TEST_F(Pfm, RejectsGarbage) {
  std::ofstream(path("bad.pfm")) << "P6\n1 1\n255\n";
  EXPECT_THROW(read_pfm(path("bad.pfm")), FormatError);
  std::ofstream(path("short.pfm")) << "Pf\n4 4\n-1.0\n abc";
  EXPECT_THROW(read_pfm(path("short.pfm")), FormatError);
}

using Png = TempDir;

TEST_F(Png, RoundTripQuantizes) {
  Image img(5, 3);
  img.set(1, 2, {1.0, 0.5, 0.25});
  write_png(path("a.png"), img);
  const Image back = read_png(path("a.png"));
  EXPECT_EQ(back.width(), 5);
  EXPECT_NEAR(back.at(1, 2).x, 1.0, 1e-12);
  EXPECT_NEAR(back.at(1, 2).y, 128 / 255.0, 1e-12);
  EXPECT_NEAR(back.at(1, 2).z, 64 / 255.0, 1e-12);
}

using Checkpoint = TempDir;

TEST_F(Checkpoint, RoundTripAndBadMagic) {
  Rng rng(2);
  RadianceGrid g({3, 4, 5}, Aabb{{-1, -2, -1}, {1, 2, 1}});
  for (double& x : g.params()) x = static_cast<float>(rng.uniform());
  write_checkpoint(path("g.ckpt"), g);
  EXPECT_EQ(read_checkpoint(path("g.ckpt")), g);
  EXPECT_EQ(fs::file_size(path("g.ckpt")), 44 + 4 * g.params().size());
  std::string bytes = slurp(path("g.ckpt"));
  bytes[0] = 'X';
  std::ofstream(path("bad.ckpt"), std::ios::binary) << bytes;
  EXPECT_THROW(read_checkpoint(path("bad.ckpt")), FormatError);
}

TEST(GitBlobSha1, MatchesGit) {
  // `printf 'hello\n' | git hash-object --stdin`
  EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

using Cli = TempDir;

TEST_F(Cli, ProbmapConstantImageIsDegenerate) {
  write_png(path("c.png"), Image(16, 16, {0.4, 0.4, 0.4}));
  const auto r = cli({"probmap", "--image", path("c.png"), "--out-prefix", path("c")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("degenerate map"), std::string::npos);
}

TEST_F(Cli, ProbmapWritesThreeMapsAndFusedIsTheMean) {
  const auto gt = render_ground_truth(default_scene(), default_rig().cameras[0]);
  write_png(path("v.png"), gt.image);
  write_pfm(path("v.pfm"), gt.depth);
  const auto r = cli({"probmap", "--image", path("v.png"), "--depth", path("v.pfm"), "--beta", "0.5",
                      "--out-prefix", path("out/v")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pc = read_pfm(path("out/v.pc.pfm")), pd = read_pfm(path("out/v.pd.pfm"));
  const auto fused = read_pfm(path("out/v.fused.pfm"));
  for (std::size_t i = 0; i < fused.size(); ++i)
    EXPECT_NEAR(fused.values()[i], 0.5 * (pc.values()[i] + pd.values()[i]), 1e-6);
  EXPECT_TRUE(fs::exists(path("out/v.fused.png")));
  const auto manifest = nlohmann::json::parse(slurp(path("out/v.manifest.json")));
  EXPECT_EQ(manifest["inputs"]["image"]["sha1"], git_blob_sha1(slurp(path("v.png"))));
}

TEST_F(Cli, ProbmapBetaNeedsDepth) {
  write_png(path("v.png"), render_ground_truth(default_scene(), default_rig().cameras[0]).image);
  EXPECT_EQ(cli({"probmap", "--image", path("v.png"), "--beta", "0.2", "--out-prefix", path("x")}).code, 2);
}

TEST_F(Cli, UnknownFlagAndMissingFile) {
  EXPECT_EQ(cli({"train", "--scene", kScene, "--out", path("t"), "--bogus", "1"}).code, 2);
  EXPECT_EQ(cli({"probmap", "--image", path("nope.png"), "--out-prefix", path("x")}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
}

TEST_F(Cli, TrainZeroItersWritesHeaderOnly) {
  const auto r = cli({"train", "--scene", kScene, "--iters", "0", "--out", path("t")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("t/curve.csv")), "iter,wall_ms,loss,psnr,ssim\n");
  EXPECT_TRUE(fs::exists(path("t/grid.ckpt")));
  EXPECT_NE(r.out.find("iters = 0"), std::string::npos);
}

TEST_F(Cli, InvalidStrategyListsValidOnes) {
  const auto r = cli({"train", "--scene", kScene, "--strategy", "random", "--out", path("t")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("fused+adaptive"), std::string::npos);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  std::ofstream(path("run.cfg")) << "# short run\niters = 2\nbatch = 32\neval-every = 1\ndeterministic = true\n";
  const auto r = cli({"train", "--config", path("run.cfg"), "--batch", "48", "--scene", kScene, "--out", path("t")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("iters = 2"), std::string::npos);
  EXPECT_NE(r.out.find("batch = 48"), std::string::npos);
  EXPECT_NE(r.out.find("deterministic = true"), std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(path("t/manifest.json")));
  EXPECT_EQ(manifest["config"]["batch"], "48");
  EXPECT_EQ(manifest["inputs"]["scene"]["sha1"], git_blob_sha1(slurp(kScene)));

  std::ofstream(path("bad.cfg")) << "itres = 2\n";
  EXPECT_EQ(cli({"train", "--config", path("bad.cfg"), "--scene", kScene, "--out", path("t")}).code, 2);
}

TEST_F(Cli, DeterministicTrainIsReproducible) {
  const std::vector<std::string> base{"train", "--scene", kScene, "--iters", "4", "--batch", "64",
                                      "--eval-every", "2", "--seed", "5", "--deterministic", "--strategy", "fused"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a"), "--threads", "1"});
  b.insert(b.end(), {"--out", path("b"), "--threads", "3"});
  ASSERT_EQ(cli(a).code, 0);
  ASSERT_EQ(cli(b).code, 0);
  EXPECT_EQ(slurp(path("a/grid.ckpt")), slurp(path("b/grid.ckpt")));
}

TEST_F(Cli, EvalRowsAndMean) {
  ASSERT_EQ(cli({"train", "--scene", kScene, "--iters", "0", "--out", path("t")}).code, 0);
  const auto r = cli({"eval", "--checkpoint", path("t/grid.ckpt"), "--scene", kScene, "--views", "3,0",
                      "--samples", "16", "--out", path("e.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(slurp(path("e.csv")));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "view,psnr,ssim");
  double sum_p = 0, sum_s = 0, mean_p = 0, mean_s = 0;
  int rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream ls(line);
    std::string view, p, s;
    std::getline(ls, view, ',');
    std::getline(ls, p, ',');
    std::getline(ls, s, ',');
    if (view == "mean") {
      mean_p = std::stod(p);
      mean_s = std::stod(s);
    } else {
      sum_p += std::stod(p);
      sum_s += std::stod(s);
      ++rows;
    }
  }
  EXPECT_EQ(rows, 2);
  EXPECT_NEAR(mean_p, sum_p / 2, 1e-12);
  EXPECT_NEAR(mean_s, sum_s / 2, 1e-12);
}

TEST_F(Cli, EvalErrors) {
  std::ofstream(path("junk.ckpt")) << "NOTAGRID0000000000000000000000000000000000000000";
  EXPECT_EQ(cli({"eval", "--checkpoint", path("junk.ckpt"), "--scene", kScene, "--views", "3"}).code, 2);
  ASSERT_EQ(cli({"train", "--scene", kScene, "--iters", "0", "--out", path("t")}).code, 0);
  EXPECT_EQ(cli({"eval", "--checkpoint", path("t/grid.ckpt"), "--scene", kScene, "--views", ""}).code, 2);
  EXPECT_EQ(cli({"eval", "--checkpoint", path("t/grid.ckpt"), "--scene", kScene, "--views", "9"}).code, 2);
}

TEST_F(Cli, EvalGroundTruthVoxelization) {
  const SceneFile sf = load_scene(kScene);
  write_checkpoint(path("gt.ckpt"), voxelize(sf.spec, {64, 64, 64}));
  const auto r = cli({"eval", "--checkpoint", path("gt.ckpt"), "--scene", kScene, "--views", "3", "--samples", "256"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pos = r.out.find("mean,");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_GT(std::stod(r.out.substr(pos + 5)), 22.0);
}

TEST_F(Cli, CompareDeduplicatesAndWritesRows) {
  const auto r = cli({"compare", "--scene", kScene, "--strategies", "uniform,uniform", "--iters", "2",
                      "--batch", "32", "--eval-every", "1", "--out", path("c")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("duplicate"), std::string::npos);
  std::istringstream csv(slurp(path("c/comparison.csv")));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 2);
}

TEST_F(Cli, RenderGroundTruthWritesImagesAndDepth) {
  ASSERT_EQ(cli({"render-gt", "--scene", kScene, "--views", "1", "--out", path("g")}).code, 0);
  const auto img = read_png(path("g/view_1.png"));
  EXPECT_EQ(img.width(), 64);
  const auto depth = read_pfm(path("g/view_1.depth.pfm"));
  EXPECT_EQ(depth.width(), 64);
}

}  // namespace
}  // namespace raysamp
