#pragma once

// Experiment runner for the three benchmark targets. A run is described by an
// ExperimentConfig (JSON text), produces one ChainTrace per replicate, and is
// persisted as a directory holding config.json, samples_<k>.csv and
// summary.json.

#include "ram/baselines.hpp"
#include "ram/diagnostics.hpp"
#include "ram/gibbs.hpp"
#include "ram/targets.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ram {

enum class ExampleKind { mixture20, cube_mixture, sensor };
enum class KernelKind { ram, metropolis, pt, tempered };
enum class BudgetRule { none, by_evals };

struct ExperimentConfig {
  ExampleKind example = ExampleKind::mixture20;
  KernelKind kernel = KernelKind::ram;
  MixtureCase mixture_case = MixtureCase::a;
  std::size_t dim = 3;  // cube mixture only
  double sigma = 4.0;   // isotropic jumping scale; the cube mixture adapts its own

  std::size_t length = 75000;
  std::size_t burnin = 25000;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: one per hardware thread

  /// by_evals rescales the length (and, for the cube mixture, the burn-in) by
  /// reference_n_pi / (this kernel's evaluations per iteration). Without a
  /// reference, RAM chains with the same seed are run first to measure it.
  BudgetRule budget = BudgetRule::none;
  std::optional<double> reference_n_pi;

  std::size_t prerun_length = 5000;  // cube mixture pilot chains
  std::vector<double> pt_temps{1.0, 2.0, 4.0, 8.0, 16.0};
  SwapSchedule swaps;

  std::uint64_t sensor_seed = 3;
  RefreshPolicy refresh = RefreshPolicy::reevaluate_on_change;
  std::uint64_t max_tries = kDefaultMaxTries;

  std::size_t acf_lag = 50;
  std::size_t acf_coordinate = 0;
  std::vector<double> tune_grid{3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5};

  std::filesystem::path data_file;  // empty: the bundled twenty-mode file
  std::filesystem::path output_dir = "runs/default";
};

/// Parses the JSON text. Unknown keys and inconsistent values (burn-in not
/// below the length, zero replicates, unknown names) throw std::invalid_argument.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Round-trips through parse_config; includes the RNG algorithm identity.
std::string config_to_json(const ExperimentConfig& config);

std::filesystem::path default_mode_file();

struct ChainResult {
  std::size_t replicate = 0;
  ChainTrace trace;
  ChainSummary summary;
  EvalCounter counter;  // all evaluations of the main chain, by phase
};

struct RunResult {
  ExperimentConfig config;  // with length and burn-in as actually run
  std::vector<ChainResult> chains;
  std::optional<double> reference_n_pi;
  SummaryOptions options;
};

/// Twenty-mode mixture, RAM or Metropolis, start uniform on the unit square.
RunResult run_example1(const ExperimentConfig& config);
/// Cube mixture: pilot Metropolis chains from the two known modes, one-time
/// adaptation at the end of burn-in, main chain started at the first mode.
RunResult run_example2(const ExperimentConfig& config);
/// Sensor localization: Gibbs over four bivariate blocks.
RunResult run_example3(const ExperimentConfig& config);
RunResult run_experiment(const ExperimentConfig& config);

/// Summary options implied by a config (mode set, ACF settings).
SummaryOptions summary_options(const ExperimentConfig& config);

/// Expected evaluations per iteration of a non-RAM kernel under the config.
double kernel_cost(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Persistence

void write_samples_csv(std::ostream& out, const ChainTrace& trace);
/// Independent reader for write_samples_csv output; burn-in comes from the kept column.
ChainTrace read_samples_csv(std::istream& in);

std::string chain_summary_json(const ChainSummary& summary);
std::string run_summary_json(const RunResult& run);

/// Writes config.json, samples_<k>.csv and summary.json into `dir`.
void write_run(const RunResult& run, const std::filesystem::path& dir);

/// Re-reads every samples file in `dir`, recomputes each chain summary and
/// compares it textually with summary.json. Returns the mismatching files.
std::vector<std::string> recheck_run(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Tuning

struct TunePilot {
  double sigma = 0.0;
  std::size_t modes_visited = 0;
  double summed_acf = 0.0;
  double acceptance_rate = 0.0;
};

struct TuneResult {
  double sigma = 0.0;
  bool all_modes_visited = false;  // false: fell back to the most modes visited
  std::vector<TunePilot> pilots;
};

/// One pilot chain per grid value. Among pilots that visit every mode, picks
/// the smallest summed |ACF| over lags 1..acf_lag; otherwise the pilot with
/// the most modes visited (ties to the smaller summed |ACF|).
TuneResult tune_sigma(const ExperimentConfig& config);

}  // namespace ram
