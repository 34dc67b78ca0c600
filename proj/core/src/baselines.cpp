#include "ram/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace ram {

TemperatureLadder::TemperatureLadder(std::vector<double> temps, std::vector<GaussianProposal> proposals)
    : temps_(std::move(temps)), proposals_(std::move(proposals)) {
  if (temps_.empty()) throw std::invalid_argument("TemperatureLadder: no rungs");
  if (temps_.front() != 1.0) throw std::invalid_argument("TemperatureLadder: T_0 must be 1");
  for (std::size_t j = 1; j < temps_.size(); ++j) {
    if (!(temps_[j] > temps_[j - 1])) throw std::invalid_argument("TemperatureLadder: temperatures must increase");
  }
  if (proposals_.size() != temps_.size()) {
    throw std::invalid_argument("TemperatureLadder: need one proposal per rung");
  }
  for (const auto& p : proposals_) {
    if (p.dim() != proposals_.front().dim()) throw std::invalid_argument("TemperatureLadder: ragged proposals");
  }
}

TemperatureLadder TemperatureLadder::shared(std::vector<double> temps, const GaussianProposal& proposal) {
  std::vector<GaussianProposal> props(temps.size(), proposal);
  return TemperatureLadder(std::move(temps), std::move(props));
}

std::vector<double> TemperatureLadder::geometric(std::size_t rungs, double base) {
  std::vector<double> t(rungs);
  for (std::size_t j = 0; j < rungs; ++j) t[j] = std::pow(base, static_cast<double>(j));
  return t;
}

TemperatureLadder sensor_tt_ladder() {
  std::vector<GaussianProposal> props;
  props.push_back(GaussianProposal::isotropic(2, 0.9));
  for (int j = 1; j <= 3; ++j) props.push_back(GaussianProposal::isotropic(2, 0.9 * std::pow(1.2, j - 1)));
  return TemperatureLadder(TemperatureLadder::geometric(4, 2.0), std::move(props));
}

PtEnsemble init_pt_ensemble(const Vector& x0, const TemperatureLadder& ladder, const LogTarget& target,
                            EvalCounter& counter) {
  PtEnsemble e;
  for (std::size_t j = 0; j < ladder.size(); ++j) {
    e.states.push_back(x0);
    e.logpi.push_back(eval_logpi(target, x0, counter, Phase::other));
  }
  return e;
}

}  // namespace ram
