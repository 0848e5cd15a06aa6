#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pmn/cli.hpp"
#include "pmn/config.hpp"
#include "pmn/manifest.hpp"

namespace fs = std::filesystem;
using namespace pmn;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

// Small scenario in a fresh directory per test.
class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / ("pmn_cli_" + std::string(info->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    nlohmann::json j = default_config_json();
    j["node_layout"]["count"] = 8;
    j["nmax"] = 2;
    j["frames"] = 3;
    config_ = root_ / "small.json";
    std::ofstream(config_) << j.dump(2);
  }
  void TearDown() override { fs::remove_all(root_); }

  CliOptions options(const std::string& out) const {
    CliOptions o;
    o.config = config_;
    o.out = root_ / out;
    o.seed = 5;
    o.nmc = 3;
    o.n_train = 16;
    o.repeat = 1;
    o.bench_nodes = {8, 12};
    o.bench_targets = 3;
    return o;
  }

  fs::path root_;
  fs::path config_;
};

}  // namespace

TEST(Sweep, SingleValuesAndRanges) {
  EXPECT_EQ(parse_sweep("30"), std::vector<double>{30.0});
  EXPECT_EQ(parse_sweep("20:5:35"), (std::vector<double>{20, 25, 30, 35}));
  EXPECT_EQ(parse_sweep("-90:10:-70"), (std::vector<double>{-90, -80, -70}));
  EXPECT_THROW(parse_sweep("1:0:3"), std::invalid_argument);
  EXPECT_THROW(parse_sweep("3:1:1"), std::invalid_argument);
  EXPECT_THROW(parse_sweep("abc"), std::invalid_argument);
  EXPECT_THROW(parse_sweep("1:2"), std::invalid_argument);
}

TEST(BlobHash, MatchesGitObjectIds) {
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_F(CliTest, TrackWithoutTrainedParametersFails) {
  CliOptions o = options("no_params");
  o.methods = {"dan"};
  EXPECT_NE(cmd_track(o), 0);
  EXPECT_TRUE(fs::exists(o.out / "run_manifest.json"));
  const auto m = nlohmann::json::parse(slurp(o.out / "run_manifest.json"));
  EXPECT_NE(m.at("exit_code").get<int>(), 0);
}

TEST_F(CliTest, TrainThenTrackIsReproducible) {
  std::vector<std::string> track_files;
  std::string first_params, first_summary, first_track;
  for (const char* dir : {"a", "b"}) {
    CliOptions o = options(dir);
    ASSERT_EQ(cmd_train(o), 0);
    ASSERT_EQ(cmd_track(o), 0);
    const std::string params = slurp(o.out / "dan_params.json");
    const std::string summary = slurp(o.out / "rmse_summary.csv");
    const std::string dataset = slurp(o.out / "dataset.jsonl");
    EXPECT_EQ(lines(o.out / "rmse_summary.csv").size(), 4u);  // header + dan, es, nearest
    EXPECT_EQ(std::count(dataset.begin(), dataset.end(), '\n'), 16);
    const auto loss = lines(o.out / "loss_curve.csv");
    ASSERT_EQ(loss.size(), 3u);  // header, epoch 0, epoch 1
    EXPECT_EQ(loss[0], "epoch,loss");
    std::string track;
    for (const auto& e : fs::directory_iterator(o.out)) {
      const std::string name = e.path().filename().string();
      if (name.rfind("track_", 0) == 0) track += name + slurp(e.path());
    }
    if (first_params.empty()) {
      first_params = params;
      first_summary = summary;
      first_track = track;
    } else {
      EXPECT_EQ(params, first_params);
      EXPECT_EQ(summary, first_summary);
      EXPECT_EQ(track, first_track);
    }
    const auto m = nlohmann::json::parse(slurp(o.out / "run_manifest.json"));
    EXPECT_EQ(m.at("command"), "track");
    EXPECT_EQ(m.at("exit_code"), 0);
  }
  EXPECT_FALSE(first_track.empty());
}

TEST_F(CliTest, ConvergeTraceLengths) {
  CliOptions o = options("conv");
  ASSERT_EQ(cmd_converge(o), 0);
  const auto rows = lines(o.out / "converge_trace.csv");
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0], "method,iteration,cost,residual");
  int mm1 = 0, mm2 = 0, dan = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string m = rows[i].substr(0, rows[i].find(','));
    mm1 += m == "mm-admm-1";
    mm2 += m == "mm-admm-2";
    dan += m == "dan";
  }
  EXPECT_GE(mm1, 2);
  EXPECT_LE(mm1, 31);
  EXPECT_GE(mm2, 2);
  EXPECT_LE(mm2, 31);
  EXPECT_EQ(dan, 11);
}

TEST_F(CliTest, BenchWritesOneRowPerMethodAndSize) {
  CliOptions o = options("bench");
  const int rc = cmd_bench(o);
  EXPECT_TRUE(rc == 0 || rc == 4);
  const auto rows = lines(o.out / "bench.csv");
  // header + 5 selectors at two sizes + two allocators
  EXPECT_EQ(rows.size(), 1u + 10u + 2u);
}

TEST_F(CliTest, PowerSweepEmitsOneRowPerBudget) {
  CliOptions o = options("sweep");
  o.methods = {"nearest"};
  o.pt_dbm = "26:2:36";
  o.nmc = 2;
  o.traces = false;
  ASSERT_EQ(cmd_track(o), 0);
  const auto rows = lines(o.out / "rmse_summary.csv");
  ASSERT_EQ(rows.size(), 1u + 6u);
  EXPECT_EQ(rows[1].substr(0, 3), "26,");
  EXPECT_EQ(rows[6].substr(0, 3), "36,");
}

TEST_F(CliTest, TrainReportsEnumerationCap) {
  nlohmann::json j = default_config_json();
  j["node_layout"]["count"] = 40;
  j["nmax"] = 10;
  std::ofstream(config_) << j.dump(2);
  CliOptions o = options("cap");
  EXPECT_EQ(cmd_train(o), 2);
}

TEST_F(CliTest, ConvergeRejectsEmptySelection) {
  CliOptions o = options("empty");
  o.nmax = 0;
  EXPECT_NE(cmd_converge(o), 0);
}
