#pragma once

// Systematic-scan block Gibbs sampling with a RAM, Metropolis, or
// tempered-transition kernel per block.
//
// A RAM block carries its own auxiliary z_k between sweeps. Only x_k is seen
// by the other blocks.

#include "ram/baselines.hpp"
#include "ram/kernels.hpp"
#include "ram/proposal.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ram {

enum class BlockKernel { ram, metropolis, tempered };

std::string_view block_kernel_name(BlockKernel k);

struct BlockSpec {
  std::string name;
  std::vector<std::size_t> indices;
  BlockKernel kernel = BlockKernel::ram;
  GaussianProposal proposal;
  std::optional<TemperatureLadder> ladder;  // required for BlockKernel::tempered
};

/// When the cached conditional density of a block's current point (and of a
/// RAM block's z_k) is evaluated again.
enum class RefreshPolicy {
  /// Re-evaluate x_k and z_k at the start of the block whenever another block
  /// moved since this block last ran.
  reevaluate_on_change,
  /// Take the density of x_k from the cached joint value (it is the same
  /// number); only z_k is re-evaluated when another block moved.
  joint_cache,
};

/// The joint target as a function of the block coordinates only, with every
/// other coordinate frozen at `frozen_full`.
LogTarget conditional_logdensity(const LogTarget& joint, const std::vector<std::size_t>& indices,
                                 const Vector& frozen_full);

struct GibbsState {
  Vector x;
  double joint_logpi = 0.0;
  std::vector<Vector> aux;          // z_k per block (RAM blocks only)
  std::vector<double> aux_logpi;    // conditional density of z_k when last refreshed
  std::vector<std::uint64_t> seen;  // move counter when block k last finished
  std::uint64_t moves = 0;          // accepted block moves so far
};

struct BlockStepReport {
  bool accepted = false;
  std::uint64_t step_evals = 0;     // evaluations made by the kernel itself
  std::uint64_t refresh_evals = 0;  // re-evaluations of cached current values
  std::uint64_t n_down = 0, n_up = 0, n_aux = 0;
};

class GibbsSampler {
 public:
  /// Throws std::invalid_argument if the block index sets do not partition
  /// 0..dim-1, a proposal has the wrong dimension, or a tempered block has no ladder.
  GibbsSampler(LogTarget joint, std::vector<BlockSpec> blocks,
               RefreshPolicy policy = RefreshPolicy::reevaluate_on_change,
               std::uint64_t max_tries = kDefaultMaxTries);

  const std::vector<BlockSpec>& blocks() const { return blocks_; }
  const LogTarget& joint() const { return joint_; }
  RefreshPolicy policy() const { return policy_; }

  /// z_k = x_k for every block; one evaluation of the joint.
  GibbsState init(const Vector& x0, EvalCounter& counter) const;

  /// Updates every block in order. counters[k] receives block k's evaluations.
  template <RandomSource R>
  std::vector<BlockStepReport> sweep(GibbsState& s, R& rng, std::vector<EvalCounter>& counters) const;

 private:
  LogTarget joint_;
  std::vector<BlockSpec> blocks_;
  RefreshPolicy policy_;
  std::uint64_t max_tries_;
};

namespace detail {
Vector gather(const Vector& full, const std::vector<std::size_t>& idx);
void scatter(Vector& full, const std::vector<std::size_t>& idx, const Vector& part);
}  // namespace detail

template <RandomSource R>
std::vector<BlockStepReport> GibbsSampler::sweep(GibbsState& s, R& rng, std::vector<EvalCounter>& counters) const {
  if (counters.size() != blocks_.size()) counters.resize(blocks_.size());
  std::vector<BlockStepReport> reports(blocks_.size());
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const BlockSpec& b = blocks_[k];
    EvalCounter& counter = counters[k];
    BlockStepReport& rep = reports[k];
    const LogTarget cond = conditional_logdensity(joint_, b.indices, s.x);
    const Vector xk = detail::gather(s.x, b.indices);
    const bool stale = s.seen[k] != s.moves;
    const std::uint64_t before = counter.total();

    double lx = s.joint_logpi;
    if (stale && policy_ == RefreshPolicy::reevaluate_on_change) {
      lx = eval_logpi(cond, xk, counter, Phase::other);
      ++rep.refresh_evals;
    }

    switch (b.kernel) {
      case BlockKernel::ram: {
        if (stale) {
          s.aux_logpi[k] = eval_logpi(cond, s.aux[k], counter, Phase::other);
          ++rep.refresh_evals;
        }
        RamState rs{xk, s.aux[k], lx, s.aux_logpi[k]};
        const auto r = ram_step(rs, b.proposal, cond, rng, counter, max_tries_);
        rep.accepted = r.accepted;
        rep.n_down = r.n_down;
        rep.n_up = r.n_up;
        rep.n_aux = r.n_aux;
        s.aux[k] = std::move(rs.z);
        s.aux_logpi[k] = rs.logpi_z;
        detail::scatter(s.x, b.indices, rs.x);
        s.joint_logpi = rs.logpi_x;
        break;
      }
      case BlockKernel::metropolis: {
        MetropolisState ms{xk, lx};
        rep.accepted = metropolis_step(ms, b.proposal, cond, rng, counter);
        detail::scatter(s.x, b.indices, ms.x);
        s.joint_logpi = ms.logpi;
        break;
      }
      case BlockKernel::tempered: {
        MetropolisState ms{xk, lx};
        // An accepted excursion that returns the current point is not a move.
        rep.accepted = tempered_transition_step(ms, *b.ladder, cond, rng, counter).moved;
        detail::scatter(s.x, b.indices, ms.x);
        s.joint_logpi = ms.logpi;
        break;
      }
    }
    rep.step_evals = counter.total() - before - rep.refresh_evals;
    if (rep.accepted) ++s.moves;
    s.seen[k] = s.moves;
  }
  return reports;
}

}  // namespace ram
