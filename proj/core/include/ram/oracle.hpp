#pragma once

// Exact transition matrices on finite state spaces.
//
// Forced-transition laws are computed in closed form as q * alpha / A rather
// than by simulating retries, and every acceptance ratio uses the literal
// (pi(a) + eps) / (pi(b) + eps) form in extended precision. None of this goes
// through the sampling code in kernels.hpp, which makes it usable as an
// independent check on that code.

#include "ram/baselines.hpp"
#include "ram/rng.hpp"
#include "ram/targets.hpp"

#include <string>
#include <vector>

namespace ram::oracle {

inline constexpr double kEps = 1e-308;

struct DiscreteKernelMatrix {
  /// Each state as a tuple of base-state indices: (x, z) for the RAM joint
  /// chain, one entry per rung for PT, a single entry otherwise.
  std::vector<std::vector<std::size_t>> states;
  Matrix P;

  std::size_t size() const { return states.size(); }
  /// max_i |sum_j P_ij - 1|
  double row_sum_error() const;
  bool entries_in_unit_interval(double tol = 1e-15) const;
};

/// Forced Metropolis law F(x, x') = q(x'|x) alpha(x'|x) / A(x) for the
/// downhill (reciprocal ratio) or uphill (standard ratio) rule.
Matrix forced_law(const Vector& pi, const Matrix& q, bool downhill, double eps = kEps);

/// Joint chain on (x, z) in {0..n-1}^2, state index x * n + z.
DiscreteKernelMatrix build_ram_joint_matrix(const Vector& pi, const Matrix& q, double eps = kEps);

/// pi(x) q(z|x), normalized, in the same state order as build_ram_joint_matrix.
Vector ram_joint_target(const Vector& pi, const Matrix& q);

/// Sums a joint (x, z) vector over z.
Vector x_marginal(const Vector& joint, std::size_t n);

DiscreteKernelMatrix build_metropolis_matrix(const Vector& pi, const Matrix& q);

/// Rung updates (Metropolis against pi^(1/T_j) with proposal q[j]) followed by
/// the swap schedule. States enumerate {0..n-1}^R with rung 0 most significant.
DiscreteKernelMatrix build_pt_matrix(const Vector& pi, const std::vector<Matrix>& q,
                                     const std::vector<double>& temps, const SwapSchedule& schedule = {});

/// prod_j pi^(1/T_j), normalized, in build_pt_matrix order.
Vector pt_product_target(const Vector& pi, const std::vector<double>& temps);

/// Tempered transitions with temps[0] = 1 and rung proposals q[1..J] (q[0]
/// unused), by enumerating every ascent/descent path.
DiscreteKernelMatrix build_tt_matrix(const Vector& pi, const std::vector<Matrix>& q,
                                     const std::vector<double>& temps);

/// max_j |(target^T P)_j - target_j|
double check_stationarity(const DiscreteKernelMatrix& m, const Vector& target);

/// max_{a,b} |target_a P_ab - target_b P_ba|
double detailed_balance_residual(const DiscreteKernelMatrix& m, const Vector& target);

/// Stationary vector of P by least squares on [P^T - I; 1^T] v = [0; 1].
Vector stationary_distribution(const Matrix& P);

/// Probability mass on each x when starting from `start` (a distribution over
/// the matrix states) and taking one step.
Vector step_distribution(const DiscreteKernelMatrix& m, const Vector& start);

/// Uniform over the other n - 1 states.
Matrix uniform_other_states(std::size_t n);
/// q(i, i +- 1) = 1/2 with the missing neighbour at either end folded onto the diagonal.
Matrix nearest_neighbour(std::size_t n);

struct OracleCheck {
  std::string name;
  double value;
  double tolerance;
  bool passed() const { return value < tolerance; }
};
/// The fixed set of exact checks reported by `ramcli verify`.
std::vector<OracleCheck> run_standard_suite();

// ---------------------------------------------------------------------------
// Bridges so the sampling kernels can run on finite state spaces.

/// Finite-state symmetric jumping rule: the state is a 1-vector holding the index.
class DiscreteProposal {
 public:
  explicit DiscreteProposal(Matrix q);

  std::size_t dim() const { return 1; }
  const Matrix& matrix() const { return q_; }

  template <RandomSource R>
  Vector draw(const Vector& center, R& rng) const {
    const auto from = static_cast<Eigen::Index>(center[0]);
    const double u = rng.uniform();
    double acc = 0.0;
    Eigen::Index last = 0;
    for (Eigen::Index j = 0; j < q_.cols(); ++j) {
      if (q_(from, j) <= 0.0) continue;
      last = j;
      acc += q_(from, j);
      if (u < acc) return Vector::Constant(1, static_cast<double>(j));
    }
    return Vector::Constant(1, static_cast<double>(last));
  }

 private:
  Matrix q_;
};

/// log pi over the indices 0..n-1 (-inf where pi is zero).
LogTarget discrete_log_target(const Vector& pi);

}  // namespace ram::oracle
