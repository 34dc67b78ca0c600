#include "ram/oracle.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace ram::oracle {

namespace {

using LD = long double;

LD eps_ratio(double a, double b, double eps) {
  return (static_cast<LD>(a) + static_cast<LD>(eps)) / (static_cast<LD>(b) + static_cast<LD>(eps));
}

void check_inputs(const Vector& pi, const Matrix& q) {
  const auto n = pi.size();
  if (n < 2) throw std::invalid_argument("oracle: need at least two states");
  if (q.rows() != n || q.cols() != n) throw std::invalid_argument("oracle: proposal matrix has the wrong shape");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-15) throw std::invalid_argument("oracle: proposal is not symmetric");
  if ((q.rowwise().sum().array() - 1.0).abs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("oracle: proposal rows must sum to one");
  }
  if ((pi.array() < 0.0).any()) throw std::invalid_argument("oracle: negative density");
  if ((pi.array() > 0.0).count() < 2) throw std::invalid_argument("oracle: need two states of positive density");
}

Matrix metropolis_matrix(const Vector& weights, const Matrix& q) {
  const auto n = weights.size();
  Matrix P = Matrix::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    double stay = 1.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x || q(x, y) == 0.0) continue;
      const double a = weights[x] == 0.0 ? 1.0 : std::min(1.0, weights[y] / weights[x]);
      P(x, y) = q(x, y) * a;
      stay -= P(x, y);
    }
    P(x, x) = stay;
  }
  return P;
}

Vector tempered(const Vector& pi, double temp) { return pi.array().pow(1.0 / temp).matrix(); }

std::vector<std::size_t> digits(std::size_t code, std::size_t base, std::size_t len) {
  std::vector<std::size_t> d(len);
  for (std::size_t i = len; i-- > 0;) {
    d[i] = code % base;
    code /= base;
  }
  return d;
}

std::size_t encode(const std::vector<std::size_t>& d, std::size_t base) {
  std::size_t code = 0;
  for (auto v : d) code = code * base + v;
  return code;
}

}  // namespace

double DiscreteKernelMatrix::row_sum_error() const {
  return (P.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

bool DiscreteKernelMatrix::entries_in_unit_interval(double tol) const {
  return (P.array() >= -tol).all() && (P.array() <= 1.0 + tol).all();
}

Matrix forced_law(const Vector& pi, const Matrix& q, bool downhill, double eps) {
  const auto n = pi.size();
  Matrix F = Matrix::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    std::vector<LD> w(static_cast<std::size_t>(n));
    LD total = 0;
    for (Eigen::Index y = 0; y < n; ++y) {
      const LD r = downhill ? eps_ratio(pi[x], pi[y], eps) : eps_ratio(pi[y], pi[x], eps);
      w[y] = static_cast<LD>(q(x, y)) * std::min<LD>(1, r);
      total += w[y];
    }
    assert(total > 0 && "forced transition cannot terminate");
    if (!(total > 0)) throw std::logic_error("oracle: forced transition cannot terminate");
    for (Eigen::Index y = 0; y < n; ++y) F(x, y) = static_cast<double>(w[y] / total);
  }
  return F;
}

DiscreteKernelMatrix build_ram_joint_matrix(const Vector& pi, const Matrix& q, double eps) {
  check_inputs(pi, q);
  const auto n = static_cast<std::size_t>(pi.size());
  const Matrix down = forced_law(pi, q, true, eps);
  const Matrix up = forced_law(pi, q, false, eps);
  const Matrix down_up = down * up;

  DiscreteKernelMatrix m;
  m.P = Matrix::Zero(n * n, n * n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t z = 0; z < n; ++z) m.states.push_back({x, z});
  }
  auto inner = [&](std::size_t a, std::size_t b) { return std::min<LD>(1, eps_ratio(pi[a], pi[b], eps)); };
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t z = 0; z < n; ++z) {
      const std::size_t from = x * n + z;
      LD stay = 0;
      for (std::size_t xs = 0; xs < n; ++xs) {
        for (std::size_t zs = 0; zs < n; ++zs) {
          const LD prop = static_cast<LD>(down_up(x, xs)) * static_cast<LD>(down(xs, zs));
          if (prop == 0) continue;
          const LD num = static_cast<LD>(pi[xs]) * inner(x, z);
          const LD den = static_cast<LD>(pi[x]) * inner(xs, zs);
          const LD alpha = den == 0 ? LD(1) : std::min<LD>(1, num / den);
          m.P(from, xs * n + zs) += static_cast<double>(prop * alpha);
          stay += prop * (1 - alpha);
        }
      }
      m.P(from, from) += static_cast<double>(stay);
    }
  }
  return m;
}

Vector ram_joint_target(const Vector& pi, const Matrix& q) {
  const auto n = pi.size();
  Vector t(n * n);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index z = 0; z < n; ++z) t[x * n + z] = pi[x] * q(x, z);
  }
  return t / t.sum();
}

Vector x_marginal(const Vector& joint, std::size_t n) {
  Vector m = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t z = 0; z < n; ++z) m[x] += joint[x * n + z];
  }
  return m;
}

DiscreteKernelMatrix build_metropolis_matrix(const Vector& pi, const Matrix& q) {
  check_inputs(pi, q);
  DiscreteKernelMatrix m;
  for (Eigen::Index x = 0; x < pi.size(); ++x) m.states.push_back({static_cast<std::size_t>(x)});
  m.P = metropolis_matrix(pi, q);
  return m;
}

DiscreteKernelMatrix build_pt_matrix(const Vector& pi, const std::vector<Matrix>& q, const std::vector<double>& temps,
                                     const SwapSchedule& schedule) {
  const std::size_t rungs = temps.size();
  if (rungs == 0 || q.size() != rungs) throw std::invalid_argument("oracle: one proposal per rung required");
  for (const auto& qj : q) check_inputs(pi, qj);
  if ((pi.array() <= 0.0).any()) throw std::invalid_argument("oracle: tempering checks need a positive density");
  const auto n = static_cast<std::size_t>(pi.size());
  std::size_t total = 1;
  for (std::size_t j = 0; j < rungs; ++j) total *= n;

  std::vector<Matrix> rung;
  std::vector<Vector> tw;
  for (std::size_t j = 0; j < rungs; ++j) {
    tw.push_back(tempered(pi, temps[j]));
    rung.push_back(metropolis_matrix(tw.back(), q[j]));
  }

  DiscreteKernelMatrix m;
  Matrix update = Matrix::Zero(total, total);
  for (std::size_t a = 0; a < total; ++a) {
    const auto da = digits(a, n, rungs);
    m.states.push_back(da);
    for (std::size_t b = 0; b < total; ++b) {
      const auto db = digits(b, n, rungs);
      double p = 1.0;
      for (std::size_t j = 0; j < rungs && p != 0.0; ++j) p *= rung[j](da[j], db[j]);
      update(a, b) = p;
    }
  }

  Matrix swap = Matrix::Identity(total, total);
  if (rungs >= 2 && schedule.proposals > 0) {
    Matrix single = Matrix::Zero(total, total);
    const double pick = 1.0 / static_cast<double>(rungs - 1);
    for (std::size_t a = 0; a < total; ++a) {
      const auto da = digits(a, n, rungs);
      for (std::size_t j = 0; j + 1 < rungs; ++j) {
        const double lo = pi[da[j]], hi = pi[da[j + 1]];
        const double alpha = std::min(1.0, std::pow(hi / lo, 1.0 / temps[j] - 1.0 / temps[j + 1]));
        auto db = da;
        std::swap(db[j], db[j + 1]);
        single(a, encode(db, n)) += pick * alpha;
        single(a, a) += pick * (1.0 - alpha);
      }
    }
    Matrix k = Matrix::Identity(total, total);
    for (std::size_t s = 0; s < schedule.proposals; ++s) k = k * single;
    const double p = std::min(1.0, schedule.probability);
    swap = (1.0 - p) * Matrix::Identity(total, total) + p * k;
  }
  m.P = update * swap;
  return m;
}

Vector pt_product_target(const Vector& pi, const std::vector<double>& temps) {
  const auto n = static_cast<std::size_t>(pi.size());
  std::size_t total = 1;
  for (std::size_t j = 0; j < temps.size(); ++j) total *= n;
  std::vector<Vector> tw;
  for (double t : temps) {
    Vector w = tempered(pi, t);
    tw.push_back(w / w.sum());
  }
  Vector v(total);
  for (std::size_t a = 0; a < total; ++a) {
    const auto d = digits(a, n, temps.size());
    double p = 1.0;
    for (std::size_t j = 0; j < temps.size(); ++j) p *= tw[j][d[j]];
    v[a] = p;
  }
  return v;
}

DiscreteKernelMatrix build_tt_matrix(const Vector& pi, const std::vector<Matrix>& q, const std::vector<double>& temps) {
  const std::size_t top = temps.size() - 1;
  if (temps.size() < 2 || q.size() != temps.size()) {
    throw std::invalid_argument("oracle: tempered transitions need temps[0..J] and q[0..J] with J >= 1");
  }
  if (temps.front() != 1.0) throw std::invalid_argument("oracle: temps[0] must be 1");
  for (std::size_t j = 1; j <= top; ++j) check_inputs(pi, q[j]);
  if ((pi.array() <= 0.0).any()) throw std::invalid_argument("oracle: tempering checks need a positive density");
  const auto n = static_cast<std::size_t>(pi.size());

  std::vector<Vector> tw(top + 1);
  std::vector<Matrix> kern(top + 1);
  for (std::size_t j = 0; j <= top; ++j) tw[j] = tempered(pi, temps[j]);
  for (std::size_t j = 1; j <= top; ++j) kern[j] = metropolis_matrix(tw[j], q[j]);

  DiscreteKernelMatrix m;
  m.P = Matrix::Zero(n, n);
  for (std::size_t x = 0; x < n; ++x) m.states.push_back({x});

  // up[j] and down[j] hold xhat_j and xcheck_j along the current path.
  std::vector<std::size_t> up(top + 1), down(top + 1);
  std::function<void(std::size_t, LD)> descend;
  std::function<void(std::size_t, LD)> ascend;

  descend = [&](std::size_t j, LD weight) {
    // xcheck_j is set; draw xcheck_{j-1} with the rung-j kernel.
    if (j == 0) {
      LD ratio = 1;
      for (std::size_t i = 0; i < top; ++i) {
        ratio *= (static_cast<LD>(tw[i + 1][up[i]]) / static_cast<LD>(tw[i][up[i]])) *
                 (static_cast<LD>(tw[i][down[i]]) / static_cast<LD>(tw[i + 1][down[i]]));
      }
      const LD alpha = std::min<LD>(1, ratio);
      m.P(up[0], down[0]) += static_cast<double>(weight * alpha);
      m.P(up[0], up[0]) += static_cast<double>(weight * (1 - alpha));
      return;
    }
    for (std::size_t y = 0; y < n; ++y) {
      const double p = kern[j](down[j], y);
      if (p == 0.0) continue;
      down[j - 1] = y;
      descend(j - 1, weight * p);
    }
  };
  ascend = [&](std::size_t j, LD weight) {
    // xhat_{j-1} is set; draw xhat_j with the rung-j kernel.
    if (j > top) {
      down[top] = up[top];
      descend(top, weight);
      return;
    }
    for (std::size_t y = 0; y < n; ++y) {
      const double p = kern[j](up[j - 1], y);
      if (p == 0.0) continue;
      up[j] = y;
      ascend(j + 1, weight * p);
    }
  };
  for (std::size_t x = 0; x < n; ++x) {
    up[0] = x;
    ascend(1, 1);
  }
  return m;
}

double check_stationarity(const DiscreteKernelMatrix& m, const Vector& target) {
  if (target.size() != m.P.rows()) throw std::invalid_argument("check_stationarity: dimension mismatch");
  const Vector moved = m.P.transpose() * target;
  return (moved - target).cwiseAbs().maxCoeff();
}

double detailed_balance_residual(const DiscreteKernelMatrix& m, const Vector& target) {
  if (target.size() != m.P.rows()) throw std::invalid_argument("detailed_balance_residual: dimension mismatch");
  const Matrix flow = target.asDiagonal() * m.P;
  return (flow - flow.transpose()).cwiseAbs().maxCoeff();
}

Vector stationary_distribution(const Matrix& P) {
  const auto n = P.rows();
  Matrix A(n + 1, n);
  A.topRows(n) = P.transpose() - Matrix::Identity(n, n);
  A.bottomRows(1).setOnes();
  Vector b = Vector::Zero(n + 1);
  b[n] = 1.0;
  return A.colPivHouseholderQr().solve(b);
}

Vector step_distribution(const DiscreteKernelMatrix& m, const Vector& start) { return m.P.transpose() * start; }

Matrix uniform_other_states(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  Matrix q = Matrix::Constant(k, k, 1.0 / static_cast<double>(n - 1));
  q.diagonal().setZero();
  return q;
}

Matrix nearest_neighbour(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  Matrix q = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (i > 0) q(i, i - 1) = 0.5; else q(i, i) += 0.5;
    if (i + 1 < k) q(i, i + 1) = 0.5; else q(i, i) += 0.5;
  }
  return q;
}

std::vector<OracleCheck> run_standard_suite() {
  std::vector<OracleCheck> out;
  auto ram_checks = [&](const std::string& label, const Vector& pi, const Matrix& q) {
    const auto m = build_ram_joint_matrix(pi, q);
    const Vector t = ram_joint_target(pi, q);
    const Vector stat = stationary_distribution(m.P);
    out.push_back({label + ": row sums", m.row_sum_error(), 1e-12});
    out.push_back({label + ": stationarity residual", check_stationarity(m, t), 1e-10});
    out.push_back({label + ": detailed balance residual", detailed_balance_residual(m, t), 1e-10});
    out.push_back({label + ": x-marginal of stationary vector vs pi",
                   (x_marginal(stat, static_cast<std::size_t>(pi.size())) - pi / pi.sum()).cwiseAbs().maxCoeff(),
                   1e-10});
  };
  ram_checks("RAM 3-state (1,2,4)", Eigen::Vector3d(1, 2, 4), uniform_other_states(3));
  Vector bimodal(5);
  bimodal << 4, 1, 0.01, 1, 4;
  ram_checks("RAM 5-state bimodal", bimodal, nearest_neighbour(5));
  ram_checks("RAM 4-state with a zero", Eigen::Vector4d(3, 0, 1, 2), uniform_other_states(4));

  const Vector pi3 = Eigen::Vector3d(1, 2, 4);
  {
    const auto m = build_metropolis_matrix(pi3, uniform_other_states(3));
    out.push_back({"Metropolis 3-state: stationarity residual", check_stationarity(m, pi3 / pi3.sum()), 1e-10});
    out.push_back({"Metropolis 3-state: detailed balance residual",
                   detailed_balance_residual(m, pi3 / pi3.sum()), 1e-10});
  }
  {
    const std::vector<double> temps{1.0, 2.0};
    const auto m = build_pt_matrix(pi3, {uniform_other_states(3), uniform_other_states(3)}, temps);
    out.push_back({"PT 2 rungs x 3 states: stationarity residual",
                   check_stationarity(m, pt_product_target(pi3, temps)), 1e-10});
  }
  {
    const std::vector<double> temps{1.0, 2.0, 4.0};
    const std::vector<Matrix> q(3, uniform_other_states(3));
    const auto m = build_tt_matrix(pi3, q, temps);
    out.push_back({"TT J=2 on 3 states: row sums", m.row_sum_error(), 1e-12});
    out.push_back({"TT J=2 on 3 states: stationarity residual", check_stationarity(m, pi3 / pi3.sum()), 1e-10});
  }
  return out;
}

DiscreteProposal::DiscreteProposal(Matrix q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols() || q_.rows() < 1) throw std::invalid_argument("DiscreteProposal: matrix must be square");
  if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() > 1e-15) {
    throw std::invalid_argument("DiscreteProposal: matrix must be symmetric");
  }
}

LogTarget discrete_log_target(const Vector& pi) {
  return LogTarget(
      1,
      [pi](const Vector& x) {
        const auto i = static_cast<Eigen::Index>(x[0]);
        if (i < 0 || i >= pi.size()) return -std::numeric_limits<double>::infinity();
        return pi[i] > 0.0 ? std::log(pi[i]) : -std::numeric_limits<double>::infinity();
      },
      "discrete");
}

}  // namespace ram::oracle
