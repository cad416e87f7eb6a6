#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "longmat/errors.hpp"

namespace fs = std::filesystem;
namespace lm = longmat;
namespace cli = longmat::cli;

namespace {

const char* const kDesk = R"(model: {type: bm, sigma: 0.2, mu: -0.02}
payoff: {type: discrete_asian, strike: 1.0, offsets: [0, 0.3333333333333333, 0.6666666666666666, 1.0]}
schedule: {maturities: [20, 40], tau: 1.0, window_steps: 48}
numerics: {n_paths: 10000, seed: 7, reflection_paths: 2000, vanilla_paths: 2000, c_h_paths: 10000,
           validation_samples: 1000, reflection_a: [0.2, 0.5]}
)";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("longmat_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  int run(std::initializer_list<std::string> args) {
    std::vector<std::string> storage{"longmat"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : storage) argv.push_back(s.c_str());
    out_.str("");
    err_.str("");
    return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST(Config, DefaultsAreFilledIn) {
  const auto cfg = cli::parse_config("model: {type: bm, sigma: 0.2}\npayoff: {type: integral_asian, strike: 1}\n"
                                     "schedule: {maturities: [20]}\n");
  EXPECT_EQ(cfg.schedule.tau, 1.0);
  EXPECT_EQ(cfg.schedule.window_steps, 252);
  EXPECT_EQ(cfg.schedule.resolutions, (std::vector<int>{1, 4}));
  EXPECT_EQ(cfg.numerics.n_paths, 100000u);
  EXPECT_EQ(cfg.numerics.quadrature_nodes, 16);
  EXPECT_EQ(cfg.numerics.max_evaluations, 512);
  EXPECT_EQ(cfg.numerics.truncation_tol, 1e-10);
  EXPECT_EQ(cfg.numerics.seed, 1u);
  EXPECT_FALSE(cfg.numerics.allow_experimental);
  EXPECT_EQ(cfg.output.directory, "out");
  EXPECT_TRUE(std::holds_alternative<lm::StrikeProfileBasket>(cfg.payoff.approximation));
}

TEST(Config, DefaultApproximationPerPayoff) {
  auto approx = [](const std::string& payoff) {
    return cli::parse_config("model: {type: bm, sigma: 0.2}\npayoff: " + payoff + "\nschedule: {maturities: [20]}\n")
        .payoff.approximation;
  };
  const auto basket = approx("{type: discrete_asian, strike: 1, offsets: [0, 0.5, 1]}");
  ASSERT_TRUE(std::holds_alternative<lm::VanillaBasket>(basket));
  EXPECT_EQ(std::get<lm::VanillaBasket>(basket).strikes, (std::vector<double>{1, 1, 1}));
  const auto scaled = approx("{type: discrete_lookback, strike: 1, offsets: [0, 1]}");
  ASSERT_TRUE(std::holds_alternative<lm::ScaledVanilla>(scaled));
  EXPECT_TRUE(std::isnan(std::get<lm::ScaledVanilla>(scaled).c_h));
  EXPECT_TRUE(std::holds_alternative<lm::GapCall>(approx("{type: partial_barrier, strike: 1, barrier: 1.2}")));
}

TEST(Config, RejectsInvalidDocuments) {
  const std::vector<std::string> bad{
      "model: {type: bm, sigma: 0.2, bogus: 1}\npayoff: {type: integral_asian, strike: 1}\n"
      "schedule: {maturities: [20]}\n",
      "model: {type: bm, sigma: 0.2}\npayoff: {type: integral_asian, strike: 1}\nschedule: {maturities: [20]}\n"
      "extra: 1\n",
      "model: {type: bm, sigma: -0.2}\npayoff: {type: integral_asian, strike: 1}\nschedule: {maturities: [20]}\n",
      "model: {type: bm, sigma: 0.2}\npayoff: {type: integral_asian, strike: one}\nschedule: {maturities: [20]}\n",
      "model: {type: bm, sigma: 0.2}\npayoff: {type: partial_barrier, strike: 1}\nschedule: {maturities: [20]}\n",
      "model: {type: bm, sigma: 0.2}\npayoff: {type: integral_asian, strike: 1, offsets: [0]}\n"
      "schedule: {maturities: [20]}\n",
      "model: {type: bm, sigma: 0.2}\npayoff: {type: integral_asian, strike: 1}\nschedule: {maturities: [0.5]}\n",
      "model: {type: bm, sigma: 0.2}\npayoff: {type: integral_asian, strike: 1}\nschedule: {maturities: [20]}\n"
      "numerics: {seed: -3}\n",
      "model: {type: bm, sigma: 0.2}\npayoff: {type: integral_asian, strike: 1}\nschedule: {maturities: [20]}\n"
      "output: {formats: [parquet]}\n",
      "model: [1, 2\n",
  };
  for (const auto& text : bad) EXPECT_THROW(cli::parse_config(text), lm::ConfigError) << text;
}

TEST(Config, EmittedConfigRoundTrips) {
  const auto cfg = cli::parse_config(kDesk);
  const auto text = cli::emit_config(cfg);
  EXPECT_EQ(cli::emit_config(cli::parse_config(text)), text);
  auto odd = cfg;
  odd.output.directory = "dir with \"quotes\" and \\slashes";
  EXPECT_EQ(cli::parse_config(cli::emit_config(odd)).output.directory, odd.output.directory);
}

TEST_F(CliTest, ExitCodes) {
  const auto desk = write("desk.yaml", kDesk).string();
  const auto bad = write("bad.yaml", "model: {type: bm, sigma: 0.2, bogus: 1}\n").string();
  const auto vg = write("vg.yaml",
                        "model: {type: vg, sigma: 0.2, lambda: 0.5}\npayoff: {type: integral_asian, strike: 1}\n"
                        "schedule: {maturities: [20]}\n")
                      .string();
  EXPECT_EQ(run({"alpha", "--config", desk, "--out", (dir_ / "a").string()}), 0);
  EXPECT_EQ(run({"frobnicate", "--config", desk}), 2);
  EXPECT_EQ(run({"alpha"}), 2);
  EXPECT_EQ(run({"alpha", "--config", (dir_ / "missing.yaml").string()}), 2);
  EXPECT_EQ(run({"alpha", "--config", bad}), 2);
  EXPECT_NE(err_.str().find("bogus"), std::string::npos);
  EXPECT_EQ(run({"alpha", "--config", desk, "--seed", "-1"}), 2);
  EXPECT_EQ(run({"price", "--config", vg, "--out", (dir_ / "v").string()}), 3);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(CliTest, ErrorConstantIsReproducibleAndReusable) {
  const auto desk = write("desk.yaml", kDesk).string();
  ASSERT_EQ(run({"error-constant", "--config", desk, "--out", (dir_ / "e1").string(), "--workers", "1"}), 0);
  ASSERT_EQ(run({"error-constant", "--config", desk, "--out", (dir_ / "e2").string(), "--workers", "2"}), 0);
  for (const char* f : {"error_constant.csv", "epsilon_curve.csv"}) {
    EXPECT_EQ(slurp(dir_ / "e1" / f), slurp(dir_ / "e2" / f)) << f;
  }
  const auto ec = cli::read_csv(dir_ / "e1" / "error_constant.csv");
  ASSERT_EQ(ec.size(), 1u);
  EXPECT_EQ(ec[0].at("seed"), "7");
  EXPECT_EQ(ec[0].at("n_paths"), "10000");

  const auto reuse = (dir_ / "e1" / "error_constant.csv").string();
  ASSERT_EQ(run({"price", "--config", desk, "--out", (dir_ / "p1").string(), "--error-constant", reuse}), 0);
  ASSERT_EQ(run({"price", "--config", desk, "--out", (dir_ / "p2").string()}), 0);
  EXPECT_EQ(slurp(dir_ / "p1" / "prices.csv"), slurp(dir_ / "p2" / "prices.csv"));
  const auto prices = cli::read_csv(dir_ / "p1" / "prices.csv");
  ASSERT_EQ(prices.size(), 2u);
  EXPECT_EQ(prices[0].at("maturity"), "20");
  EXPECT_EQ(prices[1].at("maturity"), "40");

  const auto other = write("other.yaml", std::string(kDesk).replace(std::string(kDesk).find("mu: -0.02"), 9,
                                                                     "mu: -0.03"))
                         .string();
  EXPECT_EQ(run({"price", "--config", other, "--out", (dir_ / "p3").string(), "--error-constant", reuse}), 2);
  EXPECT_NE(err_.str().find("different"), std::string::npos);
}

TEST_F(CliTest, ResolvedConfigReloadsToSameRun) {
  const auto desk = write("desk.yaml", kDesk).string();
  ASSERT_EQ(run({"alpha", "--config", desk, "--out", (dir_ / "r1").string(), "--seed", "99"}), 0);
  const auto resolved = cli::load_config((dir_ / "r1" / "resolved_config.yaml").string());
  EXPECT_EQ(resolved.numerics.seed, 99u);
  EXPECT_EQ(resolved.output.directory, (dir_ / "r1").string());
  EXPECT_EQ(cli::emit_config(resolved), slurp(dir_ / "r1" / "resolved_config.yaml"));
}

TEST_F(CliTest, ValidateAndStudyWriteTheirTables) {
  const auto desk = write("desk.yaml", kDesk).string();
  ASSERT_EQ(run({"validate", "--config", desk, "--out", (dir_ / "v").string()}), 0) << err_.str();
  for (const auto& row : cli::read_csv(dir_ / "v" / "validation.csv")) {
    EXPECT_NE(row.at("status"), "FAIL") << row.at("check");
  }
  ASSERT_EQ(run({"study", "--config", desk, "--out", (dir_ / "s").string()}), 0) << err_.str();
  const auto study = cli::read_csv(dir_ / "s" / "study.csv");
  EXPECT_EQ(study.size(), 4u);
  const auto summary = cli::read_csv(dir_ / "s" / "study_summary.csv");
  ASSERT_FALSE(summary.empty());
  EXPECT_EQ(summary.back().at("check"), "overall");
  EXPECT_TRUE(fs::exists(dir_ / "s" / "reflection.csv"));
  EXPECT_NE(out_.str().find("study verdict"), std::string::npos);
}

TEST(Csv, QuotingRoundTrips) {
  const auto dir = fs::temp_directory_path() / "longmat_cli_csv";
  fs::create_directories(dir);
  {
    cli::CsvWriter w(dir / "t.csv", {"a", "b"});
    w.row({"x,y", "say \"hi\""});
    EXPECT_THROW(w.row({"only one"}), lm::Error);
  }
  const auto rows = cli::read_csv(dir / "t.csv");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].at("a"), "x,y");
  EXPECT_EQ(rows[0].at("b"), "say \"hi\"");
  fs::remove_all(dir);
}
