#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace ram {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Which part of a sampler requested a density evaluation.
enum class Phase : std::uint8_t { downhill = 0, uphill = 1, aux_downhill = 2, other = 3 };

std::string_view phase_name(Phase p);

/// Exact count of target-density evaluations, split by phase.
class EvalCounter {
 public:
  void add(Phase p, std::uint64_t n = 1) { per_phase_[static_cast<std::size_t>(p)] += n; }
  std::uint64_t count(Phase p) const { return per_phase_[static_cast<std::size_t>(p)]; }
  std::uint64_t total() const {
    return per_phase_[0] + per_phase_[1] + per_phase_[2] + per_phase_[3];
  }
  EvalCounter& operator+=(const EvalCounter& other) {
    for (std::size_t i = 0; i < per_phase_.size(); ++i) per_phase_[i] += other.per_phase_[i];
    return *this;
  }

 private:
  std::array<std::uint64_t, 4> per_phase_{};
};

/// An unnormalized log-density on R^d. Zero density is -inf; NaN is never a
/// valid result.
class LogTarget {
 public:
  using Fn = std::function<double(const Vector&)>;

  LogTarget(std::size_t dim, Fn fn, std::string name = {});

  std::size_t dim() const { return dim_; }
  const std::string& name() const { return name_; }

  // Uncounted evaluation. Samplers go through eval_logpi instead.
  double operator()(const Vector& x) const { return fn_(x); }

 private:
  std::size_t dim_;
  Fn fn_;
  std::string name_;
};

/// Counted evaluation: exactly one increment of `counter` in `phase`.
/// Throws std::invalid_argument on a dimension mismatch and std::domain_error
/// if the target returns NaN.
double eval_logpi(const LogTarget& target, const Vector& x, EvalCounter& counter, Phase phase);

/// log((exp(a) + eps) / (exp(b) + eps)) for vanishing eps: the plain log
/// ratio when both are finite, 0 when both densities are zero, and -inf/+inf
/// when only the numerator/denominator density is zero.
double eps_log_ratio(double log_a, double log_b);

// ---------------------------------------------------------------------------
// Gaussian mixtures

/// pi(x) ∝ sum_j (w_j / tau2_j) exp(-|x - mu_j|^2 / (2 tau2_j)).
///
/// The w_j / tau2_j prefactor is the bivariate normalizer, so in two
/// dimensions each component carries mass proportional to w_j.
struct GaussianMixture {
  std::vector<Vector> means;
  std::vector<double> variances;
  std::vector<double> weights;

  GaussianMixture(std::vector<Vector> means, std::vector<double> variances,
                  std::vector<double> weights);

  std::size_t dim() const { return means.front().size(); }
  std::size_t size() const { return means.size(); }

  /// Log-sum-exp evaluation; throws std::invalid_argument on dimension mismatch.
  double log_density(const Vector& x) const;

  LogTarget as_target(std::string name = "mixture") const;

  /// Exact first and second raw moments per coordinate, treating component j
  /// as N(mu_j, tau2_j I) with mass proportional to w_j.
  Vector mean() const;
  Vector second_moment() const;
};

double mixture_logpi(const GaussianMixture& mixture, const Vector& x);

enum class MixtureCase { a, b };

/// Reads "x1 x2" per line. Blank lines and '#' comments are skipped.
std::vector<Vector> load_modes(const std::filesystem::path& path);

/// The twenty-mode bivariate mixture. Case (a): w = 1/20, tau2 = 1/100.
/// Case (b): w_j = 1/r_j and tau2_j = r_j / 20 with r_j = |mu_j - (5,5)|.
GaussianMixture make_mixture20(const std::vector<Vector>& modes, MixtureCase which);

/// Published reference moments (E x1, E x2, E x1^2, E x2^2). The case (b)
/// second moments belong to components with standard deviation r_j / 20, so
/// they sit about 0.11 below the exact moments of make_mixture20's case (b).
std::array<double, 4> mixture20_truth(MixtureCase which);

/// Loads the mode file and builds the case. The file is checked against the
/// reference values to `tol`: all four moments of case (a) and the two means
/// of case (b). Throws std::runtime_error on mismatch.
GaussianMixture load_mixture20(const std::filesystem::path& path, MixtureCase which,
                               double tol = 5e-3);

/// The eight mode locations of the d-dimensional cube mixture (d >= 3).
std::vector<Vector> cube_mixture_means(std::size_t d);

/// Equal-weight, unit-variance mixture over cube_mixture_means(d).
GaussianMixture make_cube_mixture(std::size_t d);

// ---------------------------------------------------------------------------
// Sensor network localization

struct SensorNetwork {
  static constexpr std::size_t kSensors = 6;
  static constexpr std::size_t kUnknown = 4;

  std::array<Eigen::Vector2d, kSensors> truth;  // entries 4 and 5 are the known sensors
  std::array<std::array<int, kSensors>, kSensors> observed{};  // w_ij, symmetric
  std::array<std::array<double, kSensors>, kSensors> distance{};  // y_ij where w_ij = 1
  double obs_sd = 0.02;
  double detect_scale = 0.3;
  double prior_sd = 10.0;

  /// Log posterior over the stacked unknown locations (x1, x2, x3, x4) in R^8.
  double log_posterior(const Vector& unknown) const;

  LogTarget as_target() const;

  static std::array<Eigen::Vector2d, kSensors> default_locations();
};

double sensor_logpost(const SensorNetwork& net, const Vector& unknown);

/// Probability that the distance between two sensors is observed.
double detection_probability(double distance, double detect_scale = 0.3);

/// Draws w_ij ~ Bernoulli(detection_probability) and y_ij ~ N(|x_i - x_j|, 0.02^2).
SensorNetwork simulate_sensor_data(const std::array<Eigen::Vector2d, SensorNetwork::kSensors>& locations,
                                   std::uint64_t seed);

}  // namespace ram
