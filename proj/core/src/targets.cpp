#include "ram/targets.hpp"

#include "ram/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ram {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::downhill: return "downhill";
    case Phase::uphill: return "uphill";
    case Phase::aux_downhill: return "aux_downhill";
    case Phase::other: return "other";
  }
  return "unknown";
}

LogTarget::LogTarget(std::size_t dim, Fn fn, std::string name)
    : dim_(dim), fn_(std::move(fn)), name_(std::move(name)) {
  if (dim_ == 0) throw std::invalid_argument("LogTarget: dimension must be positive");
  if (!fn_) throw std::invalid_argument("LogTarget: empty evaluator");
}

double eval_logpi(const LogTarget& target, const Vector& x, EvalCounter& counter, Phase phase) {
  if (static_cast<std::size_t>(x.size()) != target.dim()) {
    throw std::invalid_argument("eval_logpi: point has dimension " + std::to_string(x.size()) +
                                ", target expects " + std::to_string(target.dim()));
  }
  counter.add(phase);
  const double v = target(x);
  if (std::isnan(v)) throw std::domain_error("eval_logpi: target '" + target.name() + "' returned NaN");
  return v;
}

double eps_log_ratio(double log_a, double log_b) {
  const bool a_zero = log_a == kNegInf;
  const bool b_zero = log_b == kNegInf;
  if (a_zero && b_zero) return 0.0;
  if (a_zero) return kNegInf;
  if (b_zero) return std::numeric_limits<double>::infinity();
  return log_a - log_b;
}

// ---------------------------------------------------------------------------

GaussianMixture::GaussianMixture(std::vector<Vector> m, std::vector<double> v, std::vector<double> w)
    : means(std::move(m)), variances(std::move(v)), weights(std::move(w)) {
  if (means.empty()) throw std::invalid_argument("GaussianMixture: no components");
  if (means.size() != variances.size() || means.size() != weights.size()) {
    throw std::invalid_argument("GaussianMixture: means, variances and weights differ in length");
  }
  const auto d = means.front().size();
  for (std::size_t j = 0; j < means.size(); ++j) {
    if (means[j].size() != d) throw std::invalid_argument("GaussianMixture: ragged means");
    if (!(variances[j] > 0.0)) throw std::invalid_argument("GaussianMixture: variance must be positive");
    if (!(weights[j] > 0.0)) throw std::invalid_argument("GaussianMixture: weight must be positive");
  }
}

double GaussianMixture::log_density(const Vector& x) const {
  if (x.size() != means.front().size()) throw std::invalid_argument("GaussianMixture: dimension mismatch");
  // log-sum-exp over log(w_j / tau2_j) - |x - mu_j|^2 / (2 tau2_j)
  thread_local std::vector<double> terms;
  terms.resize(means.size());
  double peak = kNegInf;
  for (std::size_t j = 0; j < means.size(); ++j) {
    const double sq = (x - means[j]).squaredNorm();
    terms[j] = std::log(weights[j] / variances[j]) - 0.5 * sq / variances[j];
    peak = std::max(peak, terms[j]);
  }
  if (peak == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return peak + std::log(acc);
}

LogTarget GaussianMixture::as_target(std::string name) const {
  return LogTarget(dim(), [m = *this](const Vector& x) { return m.log_density(x); }, std::move(name));
}

Vector GaussianMixture::mean() const {
  Vector acc = Vector::Zero(dim());
  double total = 0.0;
  for (std::size_t j = 0; j < size(); ++j) {
    acc += weights[j] * means[j];
    total += weights[j];
  }
  return acc / total;
}

Vector GaussianMixture::second_moment() const {
  Vector acc = Vector::Zero(dim());
  double total = 0.0;
  for (std::size_t j = 0; j < size(); ++j) {
    acc += weights[j] * (means[j].array().square() + variances[j]).matrix();
    total += weights[j];
  }
  return acc / total;
}

double mixture_logpi(const GaussianMixture& mixture, const Vector& x) { return mixture.log_density(x); }

std::vector<Vector> load_modes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mode file " + path.string());
  std::vector<Vector> modes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double a = 0.0, b = 0.0;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected two values");
    modes.push_back(Eigen::Vector2d(a, b));
  }
  return modes;
}

GaussianMixture make_mixture20(const std::vector<Vector>& modes, MixtureCase which) {
  const std::size_t m = modes.size();
  std::vector<double> var(m), w(m);
  const Eigen::Vector2d centre(5.0, 5.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (which == MixtureCase::a) {
      w[j] = 1.0 / static_cast<double>(m);
      var[j] = 1.0 / 100.0;
    } else {
      const double r = (modes[j] - centre).norm();
      w[j] = 1.0 / r;
      var[j] = r / 20.0;
    }
  }
  return GaussianMixture(modes, std::move(var), std::move(w));
}

std::array<double, 4> mixture20_truth(MixtureCase which) {
  if (which == MixtureCase::a) return {4.478, 4.905, 25.605, 33.920};
  return {4.688, 5.030, 25.558, 31.378};
}

GaussianMixture load_mixture20(const std::filesystem::path& path, MixtureCase which, double tol) {
  auto modes = load_modes(path);
  if (modes.size() != 20) {
    throw std::runtime_error("mode file " + path.string() + " has " + std::to_string(modes.size()) +
                             " modes, expected 20");
  }
  // Case (a) pins all four moments; case (b) shares its component means
  // with the reference values whatever the component spread.
  const auto check = [&](MixtureCase c, std::size_t count) {
    const auto mix = make_mixture20(modes, c);
    const Vector m1 = mix.mean();
    const Vector m2 = mix.second_moment();
    const std::array<double, 4> got{m1[0], m1[1], m2[0], m2[1]};
    const auto want = mixture20_truth(c);
    static constexpr std::array<const char*, 4> labels{"E(x1)", "E(x2)", "E(x1^2)", "E(x2^2)"};
    for (std::size_t i = 0; i < count; ++i) {
      if (std::abs(got[i] - want[i]) > tol) {
        std::ostringstream msg;
        msg << "mode file " << path.string() << " fails moment check: case " << (c == MixtureCase::a ? 'a' : 'b')
            << " " << labels[i] << " = " << got[i] << ", reference " << want[i];
        throw std::runtime_error(msg.str());
      }
    }
  };
  check(MixtureCase::a, 4);
  check(MixtureCase::b, 2);
  auto mix = make_mixture20(modes, which);
  return mix;
}

std::vector<Vector> cube_mixture_means(std::size_t d) {
  if (d < 3) throw std::invalid_argument("cube mixture needs d >= 3");
  // First three coordinates: cube vertices in the listed order. The tail
  // alternates (0,10,...) when the third coordinate is 10, else (10,0,...).
  static constexpr std::array<std::array<int, 3>, 8> head{{
      {1, 1, 1}, {0, 0, 0}, {1, 0, 1}, {0, 1, 1}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0}, {1, 1, 0},
  }};
  std::vector<Vector> means;
  for (const auto& h : head) {
    Vector mu(d);
    for (std::size_t i = 0; i < 3; ++i) mu[i] = 10.0 * h[i];
    for (std::size_t i = 3; i < d; ++i) {
      const bool even_slot = (i - 3) % 2 == 0;
      const bool third_high = h[2] == 1;
      mu[i] = (even_slot != third_high) ? 10.0 : 0.0;
    }
    means.push_back(std::move(mu));
  }
  return means;
}

GaussianMixture make_cube_mixture(std::size_t d) {
  return GaussianMixture(cube_mixture_means(d), std::vector<double>(8, 1.0), std::vector<double>(8, 1.0));
}

// ---------------------------------------------------------------------------

std::array<Eigen::Vector2d, SensorNetwork::kSensors> SensorNetwork::default_locations() {
  return {Eigen::Vector2d(0.57, 0.91), Eigen::Vector2d(0.10, 0.37), Eigen::Vector2d(0.26, 0.14),
          Eigen::Vector2d(0.85, 0.04), Eigen::Vector2d(0.50, 0.30), Eigen::Vector2d(0.30, 0.70)};
}

double SensorNetwork::log_posterior(const Vector& unknown) const {
  if (unknown.size() != 2 * static_cast<Eigen::Index>(kUnknown)) {
    throw std::invalid_argument("SensorNetwork: expected 8 coordinates");
  }
  std::array<Eigen::Vector2d, kSensors> loc;
  for (std::size_t k = 0; k < kUnknown; ++k) loc[k] = unknown.segment<2>(2 * k);
  loc[4] = truth[4];
  loc[5] = truth[5];

  const double two_obs_var = 2.0 * obs_sd * obs_sd;
  const double two_det_var = 2.0 * detect_scale * detect_scale;
  double lp = 0.0;
  for (std::size_t i = 0; i < kSensors; ++i) {
    for (std::size_t j = i + 1; j < kSensors; ++j) {
      const double sq = (loc[i] - loc[j]).squaredNorm();
      if (observed[i][j]) {
        const double resid = distance[i][j] - std::sqrt(sq);
        lp -= resid * resid / two_obs_var;
        lp -= sq / two_det_var;
      } else {
        // log(1 - exp(-s)) is -inf at s = 0
        const double miss = -std::expm1(-sq / two_det_var);
        if (miss <= 0.0) return kNegInf;
        lp += std::log(miss);
      }
    }
  }
  double prior = 0.0;
  for (std::size_t k = 0; k < kUnknown; ++k) prior += loc[k].squaredNorm();
  lp -= prior / (2.0 * prior_sd * prior_sd);
  return lp;
}

LogTarget SensorNetwork::as_target() const {
  return LogTarget(2 * kUnknown, [net = *this](const Vector& x) { return net.log_posterior(x); },
                   "sensor_network");
}

double sensor_logpost(const SensorNetwork& net, const Vector& unknown) { return net.log_posterior(unknown); }

double detection_probability(double distance, double detect_scale) {
  return std::exp(-distance * distance / (2.0 * detect_scale * detect_scale));
}

SensorNetwork simulate_sensor_data(const std::array<Eigen::Vector2d, SensorNetwork::kSensors>& locations,
                                   std::uint64_t seed) {
  SensorNetwork net;
  net.truth = locations;
  Rng rng(seed, 0);
  for (std::size_t i = 0; i < SensorNetwork::kSensors; ++i) {
    for (std::size_t j = i + 1; j < SensorNetwork::kSensors; ++j) {
      const double dist = (locations[i] - locations[j]).norm();
      const int w = rng.uniform() < detection_probability(dist, net.detect_scale) ? 1 : 0;
      net.observed[i][j] = net.observed[j][i] = w;
      if (w) {
        const double y = dist + net.obs_sd * rng.normal();
        net.distance[i][j] = net.distance[j][i] = y;
      }
    }
  }
  return net;
}

}  // namespace ram
