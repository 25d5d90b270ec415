#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "tdcif/dtf1.hpp"
#include "tdcif/tensor.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code = -1;
  std::string out;
  std::string err;

  json line() const { return json::parse(out); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("tdcif-cli-") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI inside the test directory; `env` is prefixed to the command.
  Result run(const std::string& args, const std::string& env = "env -u TDCIF_OUT_DIR") const {
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" TDCIF_CLI "' " + args +
                            " 2> stderr.txt";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(dir_ / "stderr.txt");
    return r;
  }

  // stdout must be exactly one JSON object on one line
  static void expect_single_json_line(const Result& r) {
    ASSERT_FALSE(r.out.empty()) << r.err;
    EXPECT_EQ(r.out.back(), '\n');
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1) << r.out;
    EXPECT_TRUE(json::parse(r.out).is_object());
  }

  fs::path path(const std::string& rel) const { return dir_ / rel; }

  void synth_colour(const std::string& out = "color") const {
    ASSERT_EQ(run("synth --kind color-ensemble --seed 7 --out " + out).code, 0);
  }

  fs::path dir_;
};

TEST_F(CliTest, SynthWritesMixingRowsAndIsReproducible) {
  const Result r = run("synth --seed 7 --out a");
  ASSERT_EQ(r.code, 0) << r.err;
  expect_single_json_line(r);
  EXPECT_EQ(r.line()["shape"], json({16, 16, 5}));
  const json m = json::parse(slurp(path("a/manifest.json")));
  const json rows = m["source"]["mixing"];
  const std::vector<double> red = {128, 256, 256, 0, 256}, green = {128, 256, 0, 256, 128},
                            blue = {128, 0, 256, 256, 32};
  for (std::size_t n = 0; n < 5; ++n) {
    EXPECT_EQ(rows[n][0].get<double>(), red[n]);
    EXPECT_EQ(rows[n][1].get<double>(), green[n]);
    EXPECT_EQ(rows[n][2].get<double>(), blue[n]);
  }
  ASSERT_EQ(run("synth --seed 7 --out b").code, 0);
  EXPECT_EQ(slurp(path("a/tensor.dtf1")), slurp(path("b/tensor.dtf1")));
  EXPECT_EQ(slurp(path("a/manifest.json")), slurp(path("b/manifest.json")));
  ASSERT_EQ(run("synth --seed 8 --out c").code, 0);
  EXPECT_NE(slurp(path("a/tensor.dtf1")), slurp(path("c/tensor.dtf1")));
}

TEST_F(CliTest, SynthRejectsUnknownKind) {
  const Result r = run("synth --kind mnist --out x");
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("mnist"), std::string::npos);
}

TEST_F(CliTest, DecomposeRecoversTheColourEnsemble) {
  synth_colour();
  const Result r = run("decompose color/tensor.dtf1 --method ll1 --ranks 1,1,1 --restarts 20 "
                    "--seed 7 --out bank");
  ASSERT_EQ(r.code, 0) << r.err;
  expect_single_json_line(r);
  const json j = r.line();
  EXPECT_LT(j["fit"].get<double>(), 1e-6);
  EXPECT_GT(j["sweeps"].get<int>(), 0);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_TRUE(fs::exists(path("bank/manifest.json")));
  EXPECT_TRUE(fs::exists(path("bank/term2_c.dtf1")));

  // byte-identical artifacts for a repeated run
  ASSERT_EQ(run("decompose color/tensor.dtf1 --method ll1 --ranks 1,1,1 --restarts 20 "
                "--seed 7 --out bank2")
                .code,
            0);
  for (const char* f : {"manifest.json", "term0_A.dtf1", "term1_B.dtf1", "term2_c.dtf1"})
    EXPECT_EQ(slurp(path("bank") / f), slurp(path("bank2") / f)) << f;
}

TEST_F(CliTest, DecomposeOtherMethods) {
  synth_colour();
  Result r = run("decompose color/tensor.dtf1 --method hosvd --out h");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(r.line()["fit"].get<double>(), 1e-10);
  r = run("decompose color/tensor.dtf1 --method cpd --ranks 3 --seed 1 --out c");
  ASSERT_EQ(r.code, 0) << r.err;
  expect_single_json_line(r);
  EXPECT_EQ(r.line()["method"], "cpd");
  EXPECT_EQ(run("decompose color/tensor.dtf1 --method cpd --ranks 1,2 --out c2").code, 3);
  EXPECT_EQ(run("decompose color/tensor.dtf1 --method tucker --out t").code, 3);
}

TEST_F(CliTest, DecomposeExitCodes) {
  synth_colour();
  Result r = run("decompose missing.dtf1 --ranks 1 --out x");
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(run("decompose color/tensor.dtf1 --ranks 1,0 --out x").code, 3);
  EXPECT_EQ(run("decompose color/tensor.dtf1 --ranks 1 --max-sweeps 0 --out x").code, 3);
  EXPECT_EQ(run("decompose color/tensor.dtf1 --ranks 1 --bogus 1").code, 3);
  EXPECT_EQ(run("frobnicate").code, 3);

  // non-convergence: exit 4, artifacts still written, status flagged
  r = run("decompose color/tensor.dtf1 --ranks 2,2 --max-sweeps 3 --out capped");
  EXPECT_EQ(r.code, 4) << r.err;
  expect_single_json_line(r);
  EXPECT_EQ(r.line()["converged"], false);
  EXPECT_NE(r.line()["status"], "ok");
  EXPECT_TRUE(fs::exists(path("capped/manifest.json")));

  std::ofstream(path("junk.dtf1")) << "not a tensor";
  EXPECT_EQ(run("decompose junk.dtf1 --ranks 1 --out j").code, 2);
}

TEST_F(CliTest, QuietSilencesStderrOnly) {
  const Result r = run("-q synth --seed 1 --out a");
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.err.empty()) << r.err;
  expect_single_json_line(r);
  const Result after = run("synth -q --seed 1 --out b");
  EXPECT_EQ(after.code, 0);
  EXPECT_TRUE(after.err.empty()) << after.err;
}

TEST_F(CliTest, OutputDirectoryDefaultsAndOverride) {
  Result r = run("synth --seed 2");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.line()["out"], "tdcif-out/synth");
  EXPECT_TRUE(fs::exists(path("tdcif-out/synth/tensor.dtf1")));
  r = run("synth --seed 2", "TDCIF_OUT_DIR=elsewhere");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.line()["out"], "elsewhere/synth");
  EXPECT_TRUE(fs::exists(path("elsewhere/synth/tensor.dtf1")));
}

TEST_F(CliTest, SplitTauAboveOneKeepsEverythingIndividual) {
  synth_colour();
  ASSERT_EQ(run("decompose color/tensor.dtf1 --ranks 1,1,1 --restarts 20 --seed 7 --out bank").code, 0);
  const Result r = run("split color/tensor.dtf1 bank --tau 1.1 --out s");
  ASSERT_EQ(r.code, 0) << r.err;
  expect_single_json_line(r);
  const tdcif::DenseTensor input = tdcif::dtf1::read(path("color/tensor.dtf1"));
  const tdcif::DenseTensor common = tdcif::dtf1::read(path("s/common.dtf1"));
  const tdcif::DenseTensor individual = tdcif::dtf1::read(path("s/individual.dtf1"));
  EXPECT_EQ(individual, input);
  for (double v : common.data()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.line()["common_norm"].get<double>(), 0.0);
}

TEST_F(CliTest, SplitTauMonotonicityAndIdenticalSlices) {
  synth_colour();
  ASSERT_EQ(run("decompose color/tensor.dtf1 --ranks 1,1,1 --restarts 20 --seed 7 --out bank").code, 0);
  const Result lo = run("split color/tensor.dtf1 bank --tau 0 --out s0");
  const Result hi = run("split color/tensor.dtf1 bank --tau 0.5 --out s5");
  ASSERT_EQ(lo.code, 0);
  ASSERT_EQ(hi.code, 0);
  const json a = lo.line()["subsets"], b = hi.line()["subsets"];
  for (std::size_t n = 0; n < a.size(); ++n)
    for (const auto& k : b[n]) EXPECT_NE(std::find(a[n].begin(), a[n].end(), k), a[n].end());
  EXPECT_LT(lo.line()["individual_ratio"].get<double>(), 1e-6);
  EXPECT_LE(lo.line()["individual_norm"].get<double>(), hi.line()["individual_norm"].get<double>());

  // a tensor of identical slices has no individual content
  std::vector<tdcif::Matrix> same(4, tdcif::frontal_slice(tdcif::dtf1::read(path("color/tensor.dtf1")), 0));
  tdcif::dtf1::write(path("same.dtf1"), tdcif::stack_frontal(same));
  ASSERT_EQ(run("decompose same.dtf1 --ranks 3 --seed 1 --out sb").code, 0);
  const Result s = run("split same.dtf1 sb --out ss");
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_LT(s.line()["individual_ratio"].get<double>(), 1e-6);
}

TEST_F(CliTest, SplitRejectsMismatchedInput) {
  synth_colour();
  ASSERT_EQ(run("decompose color/tensor.dtf1 --method hosvd --out h").code, 0);
  EXPECT_EQ(run("split color/tensor.dtf1 h --out s").code, 3);
  EXPECT_EQ(run("split color/tensor.dtf1 nowhere --out s").code, 2);
  ASSERT_EQ(run("synth --kind face-fixture --seed 1 --out face").code, 0);
  ASSERT_EQ(run("decompose color/tensor.dtf1 --ranks 1 --out b").code, 0);
  EXPECT_EQ(run("split face/tensor.dtf1 b --out s").code, 3);
}

TEST_F(CliTest, ExperimentDryRunAndFullRun) {
  std::ofstream(path("cfg.json")) << R"({
    "dataset": {"kind": "face-fixture", "seed": 0},
    "methods": ["raw", "ll1"],
    "classifiers": ["knn"],
    "split": {"groups": 6, "train_groups": 4},
    "realizations": 2,
    "seed": 3
  })";
  Result r = run("experiment cfg.json --dry-run");
  ASSERT_EQ(r.code, 0) << r.err;
  expect_single_json_line(r);
  EXPECT_TRUE(r.line().contains("plans"));
  EXPECT_EQ(r.line()["plans"].size(), 2u);
  EXPECT_FALSE(fs::exists(path("tdcif-out/experiment")));

  r = run("experiment cfg.json --out exp");
  ASSERT_EQ(r.code, 0) << r.err;
  expect_single_json_line(r);
  for (const char* f : {"results.csv", "summary.json", "config.json"})
    EXPECT_TRUE(fs::exists(path("exp") / f)) << f;
  const json s = json::parse(slurp(path("exp/summary.json")));
  EXPECT_GE(s["table"]["ll1"]["knn"]["mean_accuracy"].get<double>(),
            s["table"]["raw"]["knn"]["mean_accuracy"].get<double>());
  ASSERT_EQ(run("experiment cfg.json --out exp2").code, 0);
  EXPECT_EQ(slurp(path("exp/results.csv")), slurp(path("exp2/results.csv")));
  EXPECT_EQ(slurp(path("exp/summary.json")), slurp(path("exp2/summary.json")));
}

TEST_F(CliTest, MalformedConfigReportsLineOrField) {
  std::ofstream(path("syntax.json")) << "{\n  \"seed\": 1,\n  \"realizations\" 2\n}\n";
  Result r = run("experiment syntax.json");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  std::ofstream(path("field.json")) << R"({"split": {"groups": "many"}})";
  r = run("experiment field.json");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("split.groups"), std::string::npos) << r.err;
  EXPECT_EQ(run("experiment nothere.json").code, 2);
}

}  // namespace
