#include "ram/proposal.hpp"

#include <cmath>
#include <stdexcept>

namespace ram {

namespace {

std::optional<Matrix> lower_factor(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Matrix l = llt.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) return std::nullopt;
  }
  return l;
}

}  // namespace

GaussianProposal::GaussianProposal(const Matrix& covariance) : cov_(covariance) {
  if (cov_.rows() == 0 || cov_.rows() != cov_.cols()) {
    throw std::invalid_argument("GaussianProposal: covariance must be square and non-empty");
  }
  if (!cov_.allFinite()) throw std::invalid_argument("GaussianProposal: covariance has non-finite entries");
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("GaussianProposal: covariance is not symmetric");
  }
  auto l = lower_factor(cov_);
  if (!l) throw std::invalid_argument("GaussianProposal: covariance is not positive definite");
  chol_ = std::move(*l);
}

GaussianProposal GaussianProposal::isotropic(std::size_t dim, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("GaussianProposal: sigma must be positive");
  return GaussianProposal(Matrix::Identity(dim, dim) * (sigma * sigma));
}

GaussianProposal GaussianProposal::scaled_identity_preset(std::size_t dim) {
  return GaussianProposal(Matrix::Identity(dim, dim) * (2.38 * 2.38 / static_cast<double>(dim)));
}

double GaussianProposal::log_density(const Vector& from, const Vector& to) const {
  const Vector w = chol_.triangularView<Eigen::Lower>().solve(to - from);
  return -0.5 * w.squaredNorm();
}

GaussianProposal adapt_from_sample(std::span<const Vector> draws) {
  if (draws.empty()) throw std::invalid_argument("adapt_from_sample: no draws");
  const auto d = draws.front().size();
  if (draws.size() < static_cast<std::size_t>(d) + 1) {
    throw std::invalid_argument("adapt_from_sample: need at least d + 1 draws");
  }
  Vector mean = Vector::Zero(d);
  for (const auto& x : draws) mean += x;
  mean /= static_cast<double>(draws.size());
  Matrix cov = Matrix::Zero(d, d);
  for (const auto& x : draws) {
    const Vector c = x - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(draws.size() - 1);

  if (lower_factor(cov)) return GaussianProposal(cov);
  const double jitter = 1e-10 * cov.trace() / static_cast<double>(d);
  cov.diagonal().array() += jitter;
  if (lower_factor(cov)) return GaussianProposal(cov);
  throw std::runtime_error("adapt_from_sample: sample covariance is not positive definite after jitter");
}

void OneTimeAdaptation::adapt(std::span<const Vector> burnin_draws) {
  if (frozen_) throw std::logic_error("proposal adaptation after the burn-in phase ended");
  if (adapted_) throw std::logic_error("proposal was already adapted once");
  proposal_ = adapt_from_sample(burnin_draws);
  adapted_ = true;
}

}  // namespace ram
