#include "ram/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace ram {

std::size_t nearest_mode(const Vector& x, std::span<const Vector> modes) {
  if (modes.empty()) throw std::invalid_argument("nearest_mode: no modes");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < modes.size(); ++j) {
    if (modes[j].size() != x.size()) throw std::invalid_argument("nearest_mode: dimension mismatch");
    const double d = (x - modes[j]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

std::vector<double> nearest_mode_frequencies(std::span<const Vector> samples, std::span<const Vector> modes) {
  std::vector<double> f(modes.size(), 0.0);
  if (samples.empty()) return f;
  for (const auto& x : samples) f[nearest_mode(x, modes)] += 1.0;
  for (auto& v : f) v /= static_cast<double>(samples.size());
  return f;
}

double frequency_error_rate(const std::vector<std::vector<double>>& freqs, std::span<const double> target_props) {
  if (freqs.empty()) throw std::invalid_argument("frequency_error_rate: no chains");
  double acc = 0.0;
  for (const auto& row : freqs) {
    if (row.size() != target_props.size()) throw std::invalid_argument("frequency_error_rate: mode count mismatch");
    for (std::size_t j = 0; j < row.size(); ++j) acc += std::abs(row[j] - target_props[j]);
  }
  return acc / static_cast<double>(freqs.size() * target_props.size());
}

std::size_t modes_discovered(std::span<const Vector> samples, std::span<const std::size_t> unknown,
                             std::span<const Vector> all_modes) {
  std::vector<bool> hit(all_modes.size(), false);
  for (const auto& x : samples) hit[nearest_mode(x, all_modes)] = true;
  std::size_t n = 0;
  for (auto j : unknown) {
    if (j >= all_modes.size()) throw std::invalid_argument("modes_discovered: unknown mode index out of range");
    n += hit[j] ? 1 : 0;
  }
  return n;
}

std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n <= max_lag) throw std::invalid_argument("autocorrelation: series must be longer than max_lag");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double c0 = 0.0;
  for (double v : series) c0 += (v - mean) * (v - mean);
  if (!(c0 > 0.0)) throw std::invalid_argument("autocorrelation: series has zero variance");
  std::vector<double> acf(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t t = k; t < n; ++t) ck += (series[t] - mean) * (series[t - k] - mean);
    acf[k] = ck / c0;
  }
  acf[0] = 1.0;
  return acf;
}

double mse(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw std::invalid_argument("mse: no estimates");
  double acc = 0.0;
  for (double e : estimates) acc += (e - truth) * (e - truth);
  return acc / static_cast<double>(estimates.size());
}

double mse_from_summary(double mean, double sd, double truth) { return sd * sd + (mean - truth) * (mean - truth); }

std::vector<double> mse_ratio(const std::vector<std::vector<double>>& estimates_by_method, double truth,
                              std::size_t reference) {
  if (reference >= estimates_by_method.size()) throw std::invalid_argument("mse_ratio: reference out of range");
  for (const auto& e : estimates_by_method) {
    if (e.size() < 2) throw std::invalid_argument("mse_ratio: need at least two estimates per method");
  }
  const double ref = mse(estimates_by_method[reference], truth);
  if (ref == 0.0) throw std::domain_error("mse_ratio: reference MSE is zero");
  std::vector<double> out;
  for (const auto& e : estimates_by_method) out.push_back(mse(e, truth) / ref);
  return out;
}

double evaluation_accounting(const SamplerSchedule& schedule) {
  struct Visitor {
    double operator()(const EeSchedule& s) const {
      // Chain k (1 = hottest) runs for chains - k + 1 stages of one target-chain length.
      double stages = 0.0, jump_stages = 0.0;
      for (std::size_t k = 1; k <= s.chains; ++k) {
        const auto span = static_cast<double>(s.chains - k + 1);
        stages += span;
        if (k >= 2) jump_stages += span;
      }
      return stages + jump_stages * s.jump_probability * (s.evals_per_jump - 1.0);
    }
    double operator()(const PtSchedule& s) const {
      if (s.rungs < 2) return static_cast<double>(s.rungs);
      return static_cast<double>(s.rungs) +
             static_cast<double>(s.swaps.proposals) * s.swaps.probability * s.evals_per_swap;
    }
    double operator()(const TtSchedule& s) const { return 2.0 * static_cast<double>(s.heated_rungs * s.blocks); }
    double operator()(const MetropolisSchedule& s) const { return static_cast<double>(s.blocks); }
  };
  return std::visit(Visitor{}, schedule);
}

EeSchedule staged_ee_schedule() { return EeSchedule{5, 0.1, 2.0}; }

PtSchedule sparse_swap_pt_schedule() { return PtSchedule{5, SwapSchedule{4, 0.1}, 2.0}; }

std::size_t matched_length(std::size_t length, double n_pi_reference, double n_pi_other) {
  if (!(n_pi_other > 0.0)) throw std::invalid_argument("matched_length: evaluation cost must be positive");
  return static_cast<std::size_t>(std::llround(static_cast<double>(length) * n_pi_reference / n_pi_other));
}

void ChainTrace::append(const Vector& x, std::span<const StepRecord> records) {
  if (static_cast<std::size_t>(x.size()) != dim) throw std::invalid_argument("ChainTrace: dimension mismatch");
  if (records.size() != blocks()) throw std::invalid_argument("ChainTrace: block count mismatch");
  coords.insert(coords.end(), x.data(), x.data() + x.size());
  steps.insert(steps.end(), records.begin(), records.end());
}

std::vector<Vector> ChainTrace::kept() const {
  std::vector<Vector> out;
  for (std::size_t i = burnin; i < iterations(); ++i) out.emplace_back(point(i));
  return out;
}

ChainSummary summarize(const ChainTrace& trace, const SummaryOptions& options) {
  ChainSummary s;
  s.iterations = trace.iterations();
  if (trace.burnin > s.iterations) throw std::invalid_argument("summarize: burn-in exceeds chain length");
  s.n_kept = s.iterations - trace.burnin;
  const auto n = static_cast<double>(s.iterations);

  for (std::size_t b = 0; b < trace.blocks(); ++b) {
    BlockSummary bs;
    bs.name = trace.block_names[b];
    std::uint64_t acc = 0, nd = 0, nu = 0, nz = 0, ev = 0, rf = 0;
    for (std::size_t i = 0; i < s.iterations; ++i) {
      const auto& r = trace.step(i, b);
      acc += r.accepted ? 1 : 0;
      nd += r.n_down;
      nu += r.n_up;
      nz += r.n_aux;
      ev += r.evals;
      rf += r.refresh;
    }
    if (s.iterations > 0) {
      bs.acceptance_rate = static_cast<double>(acc) / n;
      bs.n_down = static_cast<double>(nd) / n;
      bs.n_up = static_cast<double>(nu) / n;
      bs.n_aux = static_cast<double>(nz) / n;
      bs.n_pi = static_cast<double>(ev) / n;
      bs.n_pi_raw = static_cast<double>(ev + rf) / n;
    }
    s.acceptance_rate += bs.acceptance_rate / static_cast<double>(trace.blocks());
    s.n_pi += bs.n_pi;
    s.n_pi_raw += bs.n_pi_raw;
    s.blocks.push_back(std::move(bs));
  }

  const auto d = static_cast<Eigen::Index>(trace.dim);
  s.mean = Vector::Zero(d);
  s.second_moment = Vector::Zero(d);
  if (s.n_kept == 0) return s;

  std::vector<double> series;
  series.reserve(s.n_kept);
  for (std::size_t i = trace.burnin; i < s.iterations; ++i) {
    const auto x = trace.point(i);
    s.mean += x;
    s.second_moment += x.cwiseProduct(x);
    if (options.acf_coordinate < trace.dim) series.push_back(x[static_cast<Eigen::Index>(options.acf_coordinate)]);
  }
  s.mean /= static_cast<double>(s.n_kept);
  s.second_moment /= static_cast<double>(s.n_kept);

  if (series.size() > options.acf_lag) {
    try {
      s.acf = autocorrelation(series, options.acf_lag);
    } catch (const std::invalid_argument&) {
      s.acf.clear();
    }
  }

  if (!options.modes.empty()) {
    const auto kept = trace.kept();
    s.mode_freq = nearest_mode_frequencies(kept, options.modes);
    for (double f : s.mode_freq) s.modes_visited += f > 0.0 ? 1 : 0;
    s.modes_discovered = modes_discovered(kept, options.unknown, options.modes);
  }
  return s;
}

double summed_abs_acf(std::span<const double> acf) {
  double acc = 0.0;
  for (std::size_t k = 1; k < acf.size(); ++k) acc += std::abs(acf[k]);
  return acc;
}

std::size_t count_clusters(std::span<const Eigen::Vector2d> samples, double cell, double min_cell_mass,
                           double min_cluster_mass) {
  if (!(cell > 0.0)) throw std::invalid_argument("count_clusters: cell size must be positive");
  if (samples.empty()) return 0;
  using Key = std::pair<long long, long long>;
  std::map<Key, std::size_t> counts;
  for (const auto& p : samples) {
    ++counts[{static_cast<long long>(std::floor(p.x() / cell)), static_cast<long long>(std::floor(p.y() / cell))}];
  }
  const auto total = static_cast<double>(samples.size());
  std::map<Key, bool> keep;
  for (const auto& [k, c] : counts) {
    if (static_cast<double>(c) / total >= min_cell_mass) keep[k] = false;
  }
  std::size_t clusters = 0;
  for (auto& [start, seen] : keep) {
    if (seen) continue;
    seen = true;
    std::vector<Key> stack{start};
    std::size_t mass = 0;
    while (!stack.empty()) {
      const Key k = stack.back();
      stack.pop_back();
      mass += counts[k];
      for (long long dx = -1; dx <= 1; ++dx) {
        for (long long dy = -1; dy <= 1; ++dy) {
          auto it = keep.find({k.first + dx, k.second + dy});
          if (it != keep.end() && !it->second) {
            it->second = true;
            stack.push_back(it->first);
          }
        }
      }
    }
    if (static_cast<double>(mass) / total >= min_cluster_mass) ++clusters;
  }
  return clusters;
}

}  // namespace ram
