#pragma once

#include "ram/baselines.hpp"
#include "ram/targets.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ram {

/// Index of the closest mode in Euclidean distance; ties go to the lower index.
std::size_t nearest_mode(const Vector& x, std::span<const Vector> modes);

/// Proportion of samples whose nearest mode is each of `modes`.
std::vector<double> nearest_mode_frequencies(std::span<const Vector> samples, std::span<const Vector> modes);

/// sum_{i,j} |F_ij - p_j| / (C * M) for C chains over M modes.
double frequency_error_rate(const std::vector<std::vector<double>>& freqs, std::span<const double> target_props);

/// Number of `unknown` mode indices that are the nearest mode of at least one sample.
std::size_t modes_discovered(std::span<const Vector> samples, std::span<const std::size_t> unknown,
                             std::span<const Vector> all_modes);

/// Biased ACF estimate at lags 0..max_lag (acf[0] = 1). Throws
/// std::invalid_argument for a constant series or one no longer than max_lag.
std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag);

/// Mean squared error of replicate estimates against the truth.
double mse(std::span<const double> estimates, double truth);

/// Variance plus squared bias, from a reported mean and standard deviation.
double mse_from_summary(double mean, double sd, double truth);

/// MSE of each method divided by that of `reference`. Needs at least two
/// estimates per method; throws std::domain_error if the reference MSE is zero.
std::vector<double> mse_ratio(const std::vector<std::vector<double>>& estimates_by_method, double truth,
                              std::size_t reference);

// ---------------------------------------------------------------------------
// Expected density evaluations per iteration

/// Staged equi-energy schedule: chain k (counting from the hottest) starts
/// after k-1 stages and runs to the end; every chain but the hottest makes an
/// equi-energy jump with `jump_probability`, costing `evals_per_jump` instead
/// of one.
struct EeSchedule {
  std::size_t chains = 5;
  double jump_probability = 0.1;
  double evals_per_jump = 2.0;
};

struct PtSchedule {
  std::size_t rungs = 5;
  SwapSchedule swaps;
  double evals_per_swap = 2.0;
};

/// J heated rungs per block, 2J evaluations per block update.
struct TtSchedule {
  std::size_t heated_rungs = 3;
  std::size_t blocks = 1;
};

struct MetropolisSchedule {
  std::size_t blocks = 1;
};

using SamplerSchedule = std::variant<EeSchedule, PtSchedule, TtSchedule, MetropolisSchedule>;

/// Closed-form expected evaluations per iteration of the target chain.
double evaluation_accounting(const SamplerSchedule& schedule);

/// The two reference schedules from the twenty-mode comparison.
EeSchedule staged_ee_schedule();
PtSchedule sparse_swap_pt_schedule();

/// Chain length for another sampler that spends the same number of
/// evaluations: round(length * n_pi_reference / n_pi_other).
std::size_t matched_length(std::size_t length, double n_pi_reference, double n_pi_other);

// ---------------------------------------------------------------------------
// Chain traces and summaries

/// Per-block bookkeeping for one iteration. For kernels without forced
/// transitions n_down, n_up and n_aux stay zero.
struct StepRecord {
  bool accepted = false;
  std::uint32_t n_down = 0, n_up = 0, n_aux = 0;
  std::uint32_t evals = 0;    // evaluations made by the kernel itself
  std::uint32_t refresh = 0;  // re-evaluations of cached current values
};

/// Every iteration of one chain, burn-in included.
struct ChainTrace {
  std::size_t dim = 0;
  std::size_t burnin = 0;
  std::vector<std::string> block_names{"x"};
  std::vector<double> coords;     // iterations x dim, row-major
  std::vector<StepRecord> steps;  // iterations x blocks, row-major

  std::size_t blocks() const { return block_names.size(); }
  std::size_t iterations() const { return dim == 0 ? 0 : coords.size() / dim; }
  Eigen::Map<const Vector> point(std::size_t i) const {
    return {coords.data() + i * dim, static_cast<Eigen::Index>(dim)};
  }
  const StepRecord& step(std::size_t i, std::size_t block) const { return steps[i * blocks() + block]; }

  void append(const Vector& x, std::span<const StepRecord> records);
  /// Post-burn-in points.
  std::vector<Vector> kept() const;
};

struct BlockSummary {
  std::string name;
  double acceptance_rate = 0.0;
  double n_down = 0.0, n_up = 0.0, n_aux = 0.0;
  double n_pi = 0.0;      // kernel evaluations per iteration
  double n_pi_raw = 0.0;  // including refreshes of cached values
};

struct SummaryOptions {
  std::vector<Vector> modes;            // for nearest-mode frequencies; may be empty
  std::vector<std::size_t> unknown;     // mode indices counted by modes_discovered
  std::size_t acf_lag = 50;
  std::size_t acf_coordinate = 0;
};

/// Per-iteration rates use every iteration including burn-in; moments, ACF
/// and mode frequencies use the kept iterations only.
struct ChainSummary {
  std::size_t iterations = 0;
  std::size_t n_kept = 0;
  double acceptance_rate = 0.0;  // mean over blocks
  double n_pi = 0.0;             // summed over blocks
  double n_pi_raw = 0.0;
  std::vector<BlockSummary> blocks;
  Vector mean;
  Vector second_moment;
  std::vector<double> acf;        // empty if the kept series is too short or constant
  std::vector<double> mode_freq;  // empty without modes
  std::size_t modes_visited = 0;
  std::size_t modes_discovered = 0;
};

/// Throws std::invalid_argument if burn-in exceeds the chain length.
ChainSummary summarize(const ChainTrace& trace, const SummaryOptions& options);

/// Sum of |acf| over lags 1..L.
double summed_abs_acf(std::span<const double> acf);

/// Connected groups of occupied cells after binning 2-d samples on a square
/// grid. Cells holding less than `min_cell_mass` of the samples are dropped,
/// the rest are joined through their 8 neighbours, and groups holding at least
/// `min_cluster_mass` are counted.
std::size_t count_clusters(std::span<const Eigen::Vector2d> samples, double cell = 0.1,
                           double min_cell_mass = 0.005, double min_cluster_mass = 0.02);

}  // namespace ram
