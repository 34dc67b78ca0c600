#pragma once

// Tempering baselines: parallel tempering and tempered transitions.

#include "ram/kernels.hpp"
#include "ram/proposal.hpp"

#include <vector>

namespace ram {

/// T_0 = 1 < T_1 < ... < T_J with one jumping rule per rung.
class TemperatureLadder {
 public:
  /// Throws std::invalid_argument unless temps[0] == 1, temps is strictly
  /// increasing, and there is one proposal per rung.
  TemperatureLadder(std::vector<double> temps, std::vector<GaussianProposal> proposals);

  /// Same jumping rule at every rung.
  static TemperatureLadder shared(std::vector<double> temps, const GaussianProposal& proposal);

  /// temps[j] = base^j for j = 0..rungs-1.
  static std::vector<double> geometric(std::size_t rungs, double base);

  std::size_t size() const { return temps_.size(); }
  /// Number of heated rungs above the target, J.
  std::size_t top() const { return temps_.size() - 1; }
  double temp(std::size_t j) const { return temps_[j]; }
  const GaussianProposal& proposal(std::size_t j) const { return proposals_[j]; }
  const std::vector<double>& temps() const { return temps_; }

 private:
  std::vector<double> temps_;
  std::vector<GaussianProposal> proposals_;
};

/// The ladder used for tempered transitions on the sensor conditionals:
/// T_j = 2^j and Sigma_j = (0.9 * 1.2^(j-1))^2 I_2 for j = 1..3. Rung 0 carries
/// Sigma_1 but tempered transitions never move at rung 0.
TemperatureLadder sensor_tt_ladder();

// ---------------------------------------------------------------------------
// Parallel tempering

/// How many swaps to propose after the rung updates, and how often.
struct SwapSchedule {
  std::size_t proposals = 1;
  double probability = 1.0;
};

struct PtEnsemble {
  std::vector<Vector> states;
  std::vector<double> logpi;  // untempered log pi(x_j)

  /// log pi(x_j) / T_j
  double tempered(std::size_t j, const TemperatureLadder& ladder) const { return logpi[j] / ladder.temp(j); }
};

struct PtStepReport {
  std::vector<bool> rung_accepted;
  std::size_t swaps_proposed = 0;
  std::size_t swaps_accepted = 0;
  std::uint64_t evals = 0;
};

/// Every rung starts at x0; one counted evaluation per rung.
PtEnsemble init_pt_ensemble(const Vector& x0, const TemperatureLadder& ladder, const LogTarget& target,
                            EvalCounter& counter);

/// Log of the exchange acceptance for swapping rungs j and j+1.
inline double log_swap_acceptance(double logpi_j, double logpi_next, double temp_j, double temp_next) {
  const double diff = eps_log_ratio(logpi_next, logpi_j);
  if (diff == 0.0) return 0.0;
  return std::min(0.0, diff * (1.0 / temp_j - 1.0 / temp_next));
}

/// One Metropolis update per rung against pi^(1/T_j), then the scheduled swap
/// proposals between uniformly chosen adjacent rungs. A swap re-evaluates both
/// states, so a five-rung ladder with one swap costs 5 + 2 = 7 evaluations.
template <RandomSource R>
PtStepReport pt_step(PtEnsemble& e, const TemperatureLadder& ladder, const LogTarget& target, R& rng,
                     EvalCounter& counter, const SwapSchedule& schedule = {}) {
  PtStepReport rep;
  const std::size_t rungs = ladder.size();
  rep.rung_accepted.assign(rungs, false);
  for (std::size_t j = 0; j < rungs; ++j) {
    Vector cand = ladder.proposal(j).draw(e.states[j], rng);
    const double lp = eval_logpi(target, cand, counter, Phase::other);
    ++rep.evals;
    const double u = rng.uniform();
    const double log_ratio = eps_log_ratio(lp, e.logpi[j]);
    if (accept_log(u, log_ratio == 0.0 ? 0.0 : log_ratio / ladder.temp(j))) {
      e.states[j] = std::move(cand);
      e.logpi[j] = lp;
      rep.rung_accepted[j] = true;
    }
  }
  if (rungs < 2) return rep;
  const bool swap_now = schedule.probability >= 1.0 || rng.uniform() < schedule.probability;
  if (!swap_now) return rep;
  for (std::size_t s = 0; s < schedule.proposals; ++s) {
    auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(rungs - 1));
    j = std::min(j, rungs - 2);
    const double lj = eval_logpi(target, e.states[j], counter, Phase::other);
    const double lk = eval_logpi(target, e.states[j + 1], counter, Phase::other);
    rep.evals += 2;
    ++rep.swaps_proposed;
    const double u = rng.uniform();
    if (u < std::exp(log_swap_acceptance(lj, lk, ladder.temp(j), ladder.temp(j + 1)))) {
      std::swap(e.states[j], e.states[j + 1]);
      e.logpi[j] = lk;
      e.logpi[j + 1] = lj;
      ++rep.swaps_accepted;
    } else {
      e.logpi[j] = lj;
      e.logpi[j + 1] = lk;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Tempered transitions

struct TemperedReport {
  bool accepted = false;  // final candidate passed the acceptance test
  bool moved = false;     // ... and differs from the current point
  std::uint64_t evals = 0;
  double log_alpha = 0.0;
  std::size_t moves_up = 0;    // intra-rung acceptances while ascending
  std::size_t moves_down = 0;  // intra-rung acceptances while descending
};

/// One tempered-transition update of `state` (whose cached logpi must be the
/// current value under `target`).
///
/// Ascending j = 1..J: propose from N(xhat_{j-1}, Sigma_j), Metropolis-accept
/// against pi^(1/T_j). Descending j = J..1: propose from N(xcheck_j, Sigma_j),
/// Metropolis-accept against pi^(1/T_j), giving xcheck_{j-1}. The final
/// candidate xcheck_0 is accepted with
///   prod_{j<J} [pi_{j+1}(xhat_j) / pi_j(xhat_j)] [pi_j(xcheck_j) / pi_{j+1}(xcheck_j)],
/// evaluated pairwise per rung so that an all-rejected excursion gives exactly 1.
/// Costs 2J evaluations.
template <RandomSource R>
TemperedReport tempered_transition_step(MetropolisState& state, const TemperatureLadder& ladder,
                                        const LogTarget& target, R& rng, EvalCounter& counter) {
  TemperedReport rep;
  const std::size_t top = ladder.top();
  if (top == 0) throw std::invalid_argument("tempered transitions need at least one heated rung");

  std::vector<double> up_logpi(top + 1), down_logpi(top + 1);
  Vector cur = state.x;
  double cur_lp = state.logpi;
  up_logpi[0] = cur_lp;
  for (std::size_t j = 1; j <= top; ++j) {
    Vector cand = ladder.proposal(j).draw(cur, rng);
    const double lp = eval_logpi(target, cand, counter, Phase::other);
    ++rep.evals;
    const double r = eps_log_ratio(lp, cur_lp);
    if (accept_log(rng.uniform(), r == 0.0 ? 0.0 : r / ladder.temp(j))) {
      cur = std::move(cand);
      cur_lp = lp;
      ++rep.moves_up;
    }
    up_logpi[j] = cur_lp;
  }
  down_logpi[top] = cur_lp;
  for (std::size_t j = top; j >= 1; --j) {
    Vector cand = ladder.proposal(j).draw(cur, rng);
    const double lp = eval_logpi(target, cand, counter, Phase::other);
    ++rep.evals;
    const double r = eps_log_ratio(lp, cur_lp);
    if (accept_log(rng.uniform(), r == 0.0 ? 0.0 : r / ladder.temp(j))) {
      cur = std::move(cand);
      cur_lp = lp;
      ++rep.moves_down;
    }
    down_logpi[j - 1] = cur_lp;
  }

  double log_ratio = 0.0;
  for (std::size_t j = 0; j < top; ++j) {
    const double diff = eps_log_ratio(up_logpi[j], down_logpi[j]);
    if (diff == 0.0) continue;
    log_ratio += (1.0 / ladder.temp(j + 1) - 1.0 / ladder.temp(j)) * diff;
  }
  rep.log_alpha = std::min(0.0, log_ratio);
  if (rng.uniform() < std::exp(rep.log_alpha)) {
    rep.moved = cur != state.x;
    state.x = std::move(cur);
    state.logpi = cur_lp;
    rep.accepted = true;
  }
  return rep;
}

}  // namespace ram
