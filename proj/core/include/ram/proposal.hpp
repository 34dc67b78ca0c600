#pragma once

#include "ram/rng.hpp"
#include "ram/targets.hpp"

#include <optional>
#include <span>

namespace ram {

/// Symmetric Gaussian jumping rule N(center, covariance).
class GaussianProposal {
 public:
  /// Throws std::invalid_argument if `covariance` is not square, not symmetric
  /// to 1e-12, or not positive definite.
  explicit GaussianProposal(const Matrix& covariance);

  static GaussianProposal isotropic(std::size_t dim, double sigma);

  /// (2.38^2 / d) I_d, the usual random-walk starting scale.
  static GaussianProposal scaled_identity_preset(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(cov_.rows()); }
  const Matrix& covariance() const { return cov_; }
  const Matrix& factor() const { return chol_; }

  template <RandomSource R>
  Vector draw(const Vector& center, R& rng) const {
    Vector z(center.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return center + chol_.triangularView<Eigen::Lower>() * z;
  }

  /// Log density of drawing `to` from `from`, up to the Gaussian constant.
  double log_density(const Vector& from, const Vector& to) const;

 private:
  Matrix cov_;
  Matrix chol_;
};

/// Sample covariance (denominator n - 1) of the pooled draws. If the
/// factorization fails, 1e-10 * trace / d is added to the diagonal and the
/// factorization retried once; a second failure throws std::runtime_error.
GaussianProposal adapt_from_sample(std::span<const Vector> draws);

/// Holds the proposal for one chain and allows exactly one adaptation, which
/// must happen before the post-burn-in phase starts.
class OneTimeAdaptation {
 public:
  explicit OneTimeAdaptation(GaussianProposal initial) : proposal_(std::move(initial)) {}

  const GaussianProposal& proposal() const { return proposal_; }
  bool adapted() const { return adapted_; }
  bool frozen() const { return frozen_; }

  /// Throws std::logic_error after freeze() or on a second call.
  void adapt(std::span<const Vector> burnin_draws);

  /// Marks the start of the post-burn-in phase.
  void freeze() { frozen_ = true; }

 private:
  GaussianProposal proposal_;
  bool adapted_ = false;
  bool frozen_ = false;
};

}  // namespace ram
