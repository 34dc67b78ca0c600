#include "ram/experiments.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

using namespace ram;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ram_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small_mixture(KernelKind k = KernelKind::ram) {
  auto c = parse_config(R"({"example": "mixture20", "length": 3000, "burnin": 500, "replicates": 2, "seed": 9})");
  c.kernel = k;
  c.threads = 1;
  return c;
}

}  // namespace

TEST(Config, ExampleDependentDefaults) {
  EXPECT_DOUBLE_EQ(parse_config(R"({"example": "mixture20", "case": "b"})").sigma, 3.5);
  EXPECT_DOUBLE_EQ(parse_config(R"({"example": "sensor"})").sigma, 1.08);
  const auto s = parse_config(R"({"example": "sensor", "kernel": "tempered"})");
  EXPECT_EQ(s.length, 50000u);
  EXPECT_EQ(s.burnin, 20000u);
  EXPECT_DOUBLE_EQ(parse_config(R"({"example": "cube_mixture"})").sigma, 1.0);
}

TEST(Config, InvalidInputsAreRejected) {
  EXPECT_THROW(parse_config(R"({"lenght": 10})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"length": 100, "burnin": 100})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"replicates": 0})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"sigma": -1})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"example": "cube_mixture", "dim": 2})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"kernel": "tempered"})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"example": "sensor", "kernel": "pt"})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"kernel": "gibbs"})"), std::invalid_argument);
  EXPECT_THROW(parse_config("{not json"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"tune_grid": []})"), std::invalid_argument);
}

TEST(Config, EchoRoundTrips) {
  auto c = small_mixture();
  c.reference_n_pi = 6.25;
  const auto text = config_to_json(c);
  EXPECT_NE(text.find("mt19937_64"), std::string::npos);
  EXPECT_EQ(config_to_json(parse_config(text)), text);
}

TEST(Runs, SameSeedGivesIdenticalSamples) {
  const auto c = small_mixture();
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  ASSERT_EQ(a.chains.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(a.chains[k].trace.coords, b.chains[k].trace.coords);
    EXPECT_EQ(run_summary_json(a), run_summary_json(b));
  }
  EXPECT_NE(a.chains[0].trace.coords, a.chains[1].trace.coords);
}

TEST(Runs, ThreadCountDoesNotChangeResults) {
  auto c = small_mixture();
  const auto serial = run_experiment(c);
  c.threads = 2;
  const auto parallel = run_experiment(c);
  EXPECT_EQ(run_summary_json(serial), run_summary_json(parallel));
}

TEST(Runs, EvaluationsMatchTheCounter) {
  const auto r = run_experiment(small_mixture());
  for (const auto& ch : r.chains) {
    std::uint64_t evals = 0;
    for (const auto& s : ch.trace.steps) evals += s.evals + s.refresh;
    EXPECT_EQ(evals + 1, ch.counter.total());
  }
}

TEST(Persistence, CsvRoundTripIsExact) {
  const auto r = run_experiment(small_mixture());
  const auto& t = r.chains[0].trace;
  std::stringstream buf;
  write_samples_csv(buf, t);
  const auto back = read_samples_csv(buf);
  EXPECT_EQ(back.dim, t.dim);
  EXPECT_EQ(back.burnin, t.burnin);
  EXPECT_EQ(back.coords, t.coords);
  ASSERT_EQ(back.steps.size(), t.steps.size());
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    EXPECT_EQ(back.steps[i].accepted, t.steps[i].accepted);
    EXPECT_EQ(back.steps[i].evals, t.steps[i].evals);
    EXPECT_EQ(back.steps[i].n_up, t.steps[i].n_up);
  }
}

TEST(Persistence, WrittenRunRechecksAndDetectsTampering) {
  const auto r = run_experiment(small_mixture());
  const auto dir = scratch("recheck");
  write_run(r, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "config.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "samples_0.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  EXPECT_TRUE(recheck_run(dir).empty());

  // Rerunning the echoed config reproduces the samples byte for byte.
  const auto again = run_experiment(load_config(dir / "config.json"));
  const auto dir2 = scratch("recheck2");
  write_run(again, dir2);
  EXPECT_EQ(slurp(dir / "samples_1.csv"), slurp(dir2 / "samples_1.csv"));

  auto text = slurp(dir / "samples_0.csv");
  const auto pos = text.rfind(',');
  text.insert(pos + 1, "1");
  std::ofstream(dir / "samples_0.csv", std::ios::binary) << text;
  EXPECT_FALSE(recheck_run(dir).empty());
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST(Budget, MatchedRunSpendsTheSameEvaluationsWithinTwoPercent) {
  auto ram_cfg = parse_config(
      R"({"example": "cube_mixture", "length": 4000, "burnin": 1000, "prerun_length": 1000, "seed": 4})");
  ram_cfg.threads = 1;
  const auto ram = run_experiment(ram_cfg);
  const double ram_total = static_cast<double>(ram.chains[0].counter.total());

  for (KernelKind k : {KernelKind::metropolis, KernelKind::pt}) {
    auto c = ram_cfg;
    c.kernel = k;
    c.budget = BudgetRule::by_evals;
    const auto r = run_experiment(c);
    ASSERT_TRUE(r.reference_n_pi.has_value());
    EXPECT_NEAR(*r.reference_n_pi, ram.chains[0].summary.n_pi, 1e-12);
    const double total = static_cast<double>(r.chains[0].counter.total());
    EXPECT_NEAR(total / ram_total, 1.0, 0.02) << static_cast<int>(k);
    EXPECT_EQ(r.config.budget, BudgetRule::none);
  }
}

TEST(Budget, KernelCosts) {
  auto c = parse_config(R"({"example": "sensor", "kernel": "tempered"})");
  EXPECT_DOUBLE_EQ(kernel_cost(c), 24.0);
  c.kernel = KernelKind::metropolis;
  EXPECT_DOUBLE_EQ(kernel_cost(c), 4.0);
  c = parse_config(R"({"example": "cube_mixture", "kernel": "pt"})");
  EXPECT_DOUBLE_EQ(kernel_cost(c), 7.0);
  c.kernel = KernelKind::ram;
  EXPECT_THROW(kernel_cost(c), std::invalid_argument);
}

TEST(Sensor, FourBlocksAndDeterministicData) {
  auto c = parse_config(R"({"example": "sensor", "length": 600, "burnin": 100, "seed": 2})");
  c.threads = 1;
  const auto r = run_experiment(c);
  const auto& s = r.chains[0].summary;
  ASSERT_EQ(s.blocks.size(), 4u);
  EXPECT_EQ(s.blocks[0].name, "loc1");
  EXPECT_EQ(r.chains[0].trace.dim, 8u);
  EXPECT_GE(s.n_pi_raw, s.n_pi);
}

TEST(Tuning, SingleGridValueIsChosen) {
  auto c = small_mixture();
  c.length = 2000;
  c.burnin = 200;
  c.tune_grid = {4.0};
  const auto t = tune_sigma(c);
  EXPECT_DOUBLE_EQ(t.sigma, 4.0);
  ASSERT_EQ(t.pilots.size(), 1u);
}

TEST(Tuning, FallsBackToMostModesVisited) {
  auto c = small_mixture();
  c.length = 2000;
  c.burnin = 200;
  c.tune_grid = {0.01, 4.0};
  const auto t = tune_sigma(c);
  ASSERT_EQ(t.pilots.size(), 2u);
  EXPECT_LT(t.pilots[0].modes_visited, t.pilots[1].modes_visited);
  EXPECT_DOUBLE_EQ(t.sigma, 4.0);
}
