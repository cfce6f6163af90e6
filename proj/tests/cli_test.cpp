#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tssr/cli.hpp"

namespace tssr {
namespace {

namespace fs = std::filesystem;
const std::string kSamples = TSSR_SAMPLES_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> csv_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(std::move(row));
  }
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tssr_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  cli::RunConfig config(const std::string& command, const std::string& system) {
    cli::RunConfig c;
    c.command = command;
    c.system_path = system;
    return c;
  }

  int run_binary(const std::string& args) {
    const std::string cmd = std::string(TSSR_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

TEST_F(CliTest, SimulateIdentityWritesConstantRows) {
  auto c = config("simulate", kSamples + "/identity_discrete.json");
  c.steps = 3;
  c.out_path = (dir_ / "out.csv").string();
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_simulate(c, out, err), 0) << err.str();
  const auto text = slurp(*c.out_path);
  EXPECT_EQ(text, "t,x_0,x_1\n0,3,-4\n1,3,-4\n2,3,-4\n3,3,-4\n");
  EXPECT_EQ(out.str(), "steps: 3\nterminal_state_norm: 5\n");
}

TEST_F(CliTest, SimulateContinuousExactDecay) {
  auto c = config("simulate", kSamples + "/decay_continuous.json");
  c.t_end = 1.0;
  c.h = 0.5;
  c.method = Method::exact;
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_simulate(c, out, err), 0) << err.str();
  const auto rows = csv_rows(out.str());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows.back()[0], 1.0);
  EXPECT_NEAR(rows.back()[1], 0.36787944117144233, 1e-15);
}

TEST_F(CliTest, SimulateOrderTwoMatchesLibrarySteps) {
  auto c = config("simulate", kSamples + "/tensor_r2.json");
  c.steps = 5;
  c.emit_output = true;
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_simulate(c, out, err), 0) << err.str();
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "t,x_0_0,x_0_1,x_1_0,x_1_1,y_0,y_1");
  const auto rows = csv_rows(out.str());
  ASSERT_EQ(rows.size(), 6u);

  const auto file = parse_system_file(c.system_path);
  const auto& doc = std::get<TssrDocument>(file);
  Tensor x = *doc.x0;
  for (std::int64_t n = 0; n <= 5; ++n) {
    const auto u = doc.input.at(static_cast<double>(n), *doc.system.input_shape());
    const auto step = step_discrete(doc.system, x, u, n);
    const auto& row = rows[static_cast<std::size_t>(n)];
    ASSERT_EQ(row.size(), 7u);
    EXPECT_EQ(row[0], static_cast<double>(n));
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(row[1 + k], x[k]);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(row[5 + k], step.output[k]);
    x = step.next_state;
  }
}

TEST_F(CliTest, SimulateIsDeterministic) {
  auto c = config("simulate", kSamples + "/tensor_r2.json");
  c.steps = 40;
  c.emit_output = true;
  std::ostringstream a, b, err;
  ASSERT_EQ(cli::cmd_simulate(c, a, err), 0);
  ASSERT_EQ(cli::cmd_simulate(c, b, err), 0);
  EXPECT_EQ(a.str(), b.str());
}

TEST_F(CliTest, AnalyzeStableSystem) {
  const auto p = write("sys.json", R"({"time":"discrete","state_shape":[2],"input_shape":[2],"output_shape":[2],
    "schedule":[{"start":0,"A":{"shape":[2,2],"data":[0.5,0,0,0.5]},"B":{"shape":[2,2],"data":[1,0,0,1]},
    "C":{"shape":[2,2],"data":[1,0,0,1]}}]})");
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_analyze(config("analyze", p.string()), out, err), 0) << err.str();
  EXPECT_EQ(out.str(),
            "state_dim: 2\nspectral_radius: 0.5\nstability: stable\ncontrollability_rank: 2\nobservability_rank: 2\n");
}

TEST_F(CliTest, AnalyzeIdentityIsMarginal) {
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_analyze(config("analyze", kSamples + "/identity_discrete.json"), out, err), 0);
  EXPECT_NE(out.str().find("stability: marginal\n"), std::string::npos);
}

TEST_F(CliTest, AnalyzeContinuousPrintsRealPart) {
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_analyze(config("analyze", kSamples + "/decay_continuous.json"), out, err), 0);
  EXPECT_EQ(out.str(),
            "state_dim: 1\nspectral_radius: 1\nmax_real_part: -1\nstability: stable\n"
            "controllability_rank: none\nobservability_rank: none\n");
}

TEST_F(CliTest, AnalyzeTensorAndUnfoldedTwinAreByteIdentical) {
  std::ostringstream a, b, err;
  ASSERT_EQ(cli::cmd_analyze(config("analyze", kSamples + "/tensor_r2.json"), a, err), 0);
  ASSERT_EQ(cli::cmd_analyze(config("analyze", kSamples + "/tensor_r2_unfolded.json"), b, err), 0);
  EXPECT_EQ(a.str(), b.str());
}

TEST_F(CliTest, AnalyzeTimeVaryingFails) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_analyze(config("analyze", kSamples + "/time_varying.json"), out, err), 1);
  EXPECT_NE(err.str().find("analysis requires time-invariant system"), std::string::npos);
}

TEST_F(CliTest, MultirateIdentityForwardsBoundary) {
  auto c = config("multirate", kSamples + "/multirate_identity.json");
  c.horizon = 3;
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_multirate(c, out, err), 0) << err.str();
  // x_0(6k) -> boundary at 3k while divisible by 6, x_1(6k) -> 2k likewise (x_1(18) -> x_1(6) -> 2).
  EXPECT_EQ(out.str(), "# d=6 f=3,2\nn,x_0,x_1\n0,0,0\n6,3,2\n12,3,4\n18,9,2\n");
}

TEST_F(CliTest, MultirateWorkedInstance) {
  auto c = config("multirate", kSamples + "/multirate_worked.json");
  c.horizon = 6;
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_multirate(c, out, err), 0) << err.str();
  const auto rows = csv_rows(out.str());
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[1][0], 6.0);
  EXPECT_EQ(rows[1][1], 4.0);
  EXPECT_EQ(rows[3][0], 18.0);
  EXPECT_EQ(rows[3][1], 10.0);
  EXPECT_EQ(rows[6][0], 36.0);
  EXPECT_EQ(rows[6][1], 11.0);
}

TEST_F(CliTest, EqualClocksMatchSingleRateFile) {
  auto m = config("multirate", kSamples + "/multirate_equal_clocks.json");
  m.horizon = 8;
  auto s = config("simulate", kSamples + "/single_rate_equivalent.json");
  s.steps = 3;
  std::ostringstream mo, so, err;
  ASSERT_EQ(cli::cmd_multirate(m, mo, err), 0) << err.str();
  ASSERT_EQ(cli::cmd_simulate(s, so, err), 0) << err.str();
  const auto mr = csv_rows(mo.str());
  const auto sr = csv_rows(so.str());
  // Grid rows n = 2, 4, 8, 16 are the single-rate steps 1..4; n = 16 needs horizon 8.
  for (std::size_t j = 1; j <= 3; ++j) {
    const std::size_t k = (std::size_t{1} << j) / 2;  // n = 2^j at grid row 2^j / d
    ASSERT_EQ(mr[k][0], static_cast<double>(std::size_t{1} << j));
    EXPECT_NEAR(mr[k][1], sr[j][1], 1e-12);
    EXPECT_NEAR(mr[k][2], sr[j][2], 1e-12);
  }
}

TEST_F(CliTest, ExitCodes) {
  std::ostringstream out, err;
  auto bad = config("simulate", kSamples + "/failures/bad_data_length.json");
  bad.steps = 2;
  EXPECT_EQ(cli::cmd_simulate(bad, out, err), 1);
  EXPECT_NE(err.str().find("schedule[0].A"), std::string::npos);

  auto overflow = config("simulate", kSamples + "/failures/overflow.json");
  overflow.steps = 5;
  err.str("");
  EXPECT_EQ(cli::cmd_simulate(overflow, out, err), 2);
  EXPECT_NE(err.str().find("at step 1"), std::string::npos);

  auto missing = config("multirate", kSamples + "/failures/missing_boundary.json");
  missing.horizon = 2;
  err.str("");
  EXPECT_EQ(cli::cmd_multirate(missing, out, err), 2);
  EXPECT_NE(err.str().find("process 1 at index 4"), std::string::npos);

  auto nosteps = config("simulate", kSamples + "/identity_discrete.json");
  EXPECT_EQ(cli::cmd_simulate(nosteps, out, err), 1);
  EXPECT_EQ(cli::cmd_simulate(config("simulate", kSamples + "/nope.json"), out, err), 1);
  EXPECT_EQ(cli::run(config("bogus", ""), out, err), 1);
}

TEST_F(CliTest, BinaryFlagsAndExitCodes) {
  const auto out = (dir_ / "traj.csv").string();
  EXPECT_EQ(run_binary("simulate --system " + kSamples + "/identity_discrete.json --steps 3 --out " + out), 0);
  EXPECT_EQ(slurp(out), "t,x_0,x_1\n0,3,-4\n1,3,-4\n2,3,-4\n3,3,-4\n");
  EXPECT_EQ(run_binary("simulate --system " + kSamples + "/decay_continuous.json --t-end 1 --h 0.5 --method rk4"), 0);
  EXPECT_EQ(run_binary("analyze --system " + kSamples + "/tensor_r2.json"), 0);
  EXPECT_EQ(run_binary("multirate --system " + kSamples + "/multirate_worked.json --horizon 6 --out " + out), 0);
  EXPECT_EQ(slurp(out).substr(0, 12), "# d=6 f=3,2\n");

  EXPECT_EQ(run_binary("simulate --system " + kSamples + "/failures/bad_data_length.json --steps 2"), 1);
  EXPECT_EQ(run_binary("simulate --system " + kSamples + "/failures/overflow.json --steps 5"), 2);
  EXPECT_EQ(run_binary("multirate --system " + kSamples + "/failures/missing_boundary.json --horizon 2"), 2);
  EXPECT_EQ(run_binary("multirate --system " + kSamples + "/failures/clock_one.json --horizon 2"), 1);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("c >= 2"), std::string::npos);
  EXPECT_EQ(run_binary("analyze --system " + kSamples + "/time_varying.json"), 1);
  EXPECT_EQ(run_binary("simulate --steps 2"), 1);
  EXPECT_EQ(run_binary("simulate --system x.json --method euler --steps 1"), 1);
  EXPECT_EQ(run_binary(""), 1);
}

}  // namespace
}  // namespace tssr
