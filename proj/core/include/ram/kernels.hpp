#pragma once

// Repelling-attracting Metropolis and plain Metropolis kernels.
//
// Both kernels work on any symmetric jumping rule (anything with a
// `draw(center, rng)` member) and any RandomSource, so the same code path runs
// on continuous targets and on the finite-state targets used for exact checks.
//
// Caching: a kernel never re-evaluates a density it already holds. A RAM step
// costs one evaluation per proposal drawn in its three forced transitions; a
// Metropolis step costs exactly one evaluation.

#include "ram/rng.hpp"
#include "ram/targets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ram {

template <class P, class R>
concept JumpingRule = RandomSource<R> && requires(const P& p, const Vector& c, R& rng) {
  { p.draw(c, rng) } -> std::convertible_to<Vector>;
};

inline constexpr std::uint64_t kDefaultMaxTries = 1'000'000;

/// Thrown when a forced transition draws more than max_tries proposals.
class ForcedTransitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// u < min{1, exp(log_ratio)}, strict as in the forced-transition loops.
inline bool accept_log(double u, double log_ratio) { return u < std::exp(std::min(0.0, log_ratio)); }

/// log min{1, ratio} for the downhill rule: (pi(from) + eps) / (pi(to) + eps).
inline double log_downhill_acceptance(double logpi_from, double logpi_to) {
  return std::min(0.0, eps_log_ratio(logpi_from, logpi_to));
}

/// log min{1, ratio} for the uphill rule: (pi(to) + eps) / (pi(from) + eps).
inline double log_uphill_acceptance(double logpi_from, double logpi_to) {
  return std::min(0.0, eps_log_ratio(logpi_to, logpi_from));
}

/// log min{1, pi(proposed) / pi(current)}.
inline double log_metropolis_acceptance(double logpi_current, double logpi_proposed) {
  return std::min(0.0, eps_log_ratio(logpi_proposed, logpi_current));
}

/// Log of the joint acceptance probability of the RAM step
///
///   min{1, pi(x*) min{1, (pi(x)+eps)/(pi(z)+eps)} / (pi(x) min{1, (pi(x*)+eps)/(pi(z*)+eps)})}.
///
/// When pi(z) <= pi(x) and pi(z*) <= pi(x*) both inner minima are exactly one
/// and this is bit-identical to log_metropolis_acceptance(logpi_x, logpi_xs).
inline double log_joint_acceptance(double logpi_x, double logpi_z, double logpi_xs, double logpi_zs) {
  const double num = logpi_xs + log_downhill_acceptance(logpi_x, logpi_z);
  const double den = logpi_x + log_downhill_acceptance(logpi_xs, logpi_zs);
  return std::min(0.0, eps_log_ratio(num, den));
}

struct ForcedMove {
  Vector point;
  double logpi;
  std::uint64_t tries;
};

namespace detail {

template <class P, class R, class AcceptLog>
  requires JumpingRule<P, R>
ForcedMove forced_transition(const Vector& from, const P& proposal, const LogTarget& target, R& rng,
                             EvalCounter& counter, Phase phase, std::uint64_t max_tries,
                             AcceptLog&& log_accept) {
  for (std::uint64_t tries = 1; tries <= max_tries; ++tries) {
    Vector cand = proposal.draw(from, rng);
    const double lp = eval_logpi(target, cand, counter, phase);
    const double u = rng.uniform();
    if (accept_log(u, log_accept(lp))) return {std::move(cand), lp, tries};
  }
  throw ForcedTransitionError("forced " + std::string(phase_name(phase)) + " transition exceeded " +
                              std::to_string(max_tries) +
                              " proposals; the jumping scale is badly mismatched to the target");
}

}  // namespace detail

/// Draws proposals from `x` until one passes the downhill test
/// u < min{1, (pi(x)+eps)/(pi(x')+eps)}.
template <class P, class R>
  requires JumpingRule<P, R>
ForcedMove forced_downhill(const Vector& x, double logpi_x, const P& proposal, const LogTarget& target,
                           R& rng, EvalCounter& counter, std::uint64_t max_tries = kDefaultMaxTries,
                           Phase phase = Phase::downhill) {
  return detail::forced_transition(x, proposal, target, rng, counter, phase, max_tries,
                                   [logpi_x](double lp) { return log_downhill_acceptance(logpi_x, lp); });
}

/// Draws proposals from `x` until one passes the uphill test
/// u < min{1, (pi(x*)+eps)/(pi(x)+eps)}.
template <class P, class R>
  requires JumpingRule<P, R>
ForcedMove forced_uphill(const Vector& x, double logpi_x, const P& proposal, const LogTarget& target,
                         R& rng, EvalCounter& counter, std::uint64_t max_tries = kDefaultMaxTries) {
  return detail::forced_transition(x, proposal, target, rng, counter, Phase::uphill, max_tries,
                                   [logpi_x](double lp) { return log_uphill_acceptance(logpi_x, lp); });
}

/// Joint chain state (x, z) with cached log densities.
struct RamState {
  Vector x;
  Vector z;
  double logpi_x = 0.0;
  double logpi_z = 0.0;
};

/// z starts at x; one evaluation, counted under Phase::other.
inline RamState init_ram_state(const Vector& x0, const LogTarget& target, EvalCounter& counter) {
  const double lp = eval_logpi(target, x0, counter, Phase::other);
  return RamState{x0, x0, lp, lp};
}

struct KernelStepReport {
  bool accepted = false;
  std::uint64_t n_down = 0;
  std::uint64_t n_up = 0;
  std::uint64_t n_aux = 0;
  std::uint64_t evals = 0;
  double log_alpha = 0.0;
};

/// One RAM iteration: forced downhill x -> x', forced uphill x' -> x*, forced
/// downhill x* -> z*, then accept (x*, z*) with log_joint_acceptance.
template <class P, class R>
  requires JumpingRule<P, R>
KernelStepReport ram_step(RamState& state, const P& proposal, const LogTarget& target, R& rng,
                          EvalCounter& counter, std::uint64_t max_tries = kDefaultMaxTries) {
  KernelStepReport rep;
  const auto down = forced_downhill(state.x, state.logpi_x, proposal, target, rng, counter, max_tries);
  auto up = forced_uphill(down.point, down.logpi, proposal, target, rng, counter, max_tries);
  auto aux = forced_downhill(up.point, up.logpi, proposal, target, rng, counter, max_tries, Phase::aux_downhill);
  rep.n_down = down.tries;
  rep.n_up = up.tries;
  rep.n_aux = aux.tries;
  rep.evals = rep.n_down + rep.n_up + rep.n_aux;

  rep.log_alpha = log_joint_acceptance(state.logpi_x, state.logpi_z, up.logpi, aux.logpi);
  const double u = rng.uniform();
  if (u < std::exp(rep.log_alpha)) {
    state.x = std::move(up.point);
    state.logpi_x = up.logpi;
    state.z = std::move(aux.point);
    state.logpi_z = aux.logpi;
    rep.accepted = true;
  }
  return rep;
}

struct MetropolisState {
  Vector x;
  double logpi = 0.0;
};

inline MetropolisState init_metropolis_state(const Vector& x0, const LogTarget& target, EvalCounter& counter) {
  return MetropolisState{x0, eval_logpi(target, x0, counter, Phase::other)};
}

/// One Metropolis iteration; evaluates only the proposal.
template <class P, class R>
  requires JumpingRule<P, R>
bool metropolis_step(MetropolisState& state, const P& proposal, const LogTarget& target, R& rng,
                     EvalCounter& counter) {
  Vector cand = proposal.draw(state.x, rng);
  const double lp = eval_logpi(target, cand, counter, Phase::other);
  const double u = rng.uniform();
  if (accept_log(u, log_metropolis_acceptance(state.logpi, lp))) {
    state.x = std::move(cand);
    state.logpi = lp;
    return true;
  }
  return false;
}

}  // namespace ram
