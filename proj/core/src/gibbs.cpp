#include "ram/gibbs.hpp"

#include <stdexcept>

namespace ram {

std::string_view block_kernel_name(BlockKernel k) {
  switch (k) {
    case BlockKernel::ram: return "ram";
    case BlockKernel::metropolis: return "metropolis";
    case BlockKernel::tempered: return "tempered";
  }
  return "unknown";
}

namespace detail {

Vector gather(const Vector& full, const std::vector<std::size_t>& idx) {
  Vector part(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) part[i] = full[idx[i]];
  return part;
}

void scatter(Vector& full, const std::vector<std::size_t>& idx, const Vector& part) {
  for (std::size_t i = 0; i < idx.size(); ++i) full[idx[i]] = part[i];
}

}  // namespace detail

LogTarget conditional_logdensity(const LogTarget& joint, const std::vector<std::size_t>& indices,
                                 const Vector& frozen_full) {
  if (static_cast<std::size_t>(frozen_full.size()) != joint.dim()) {
    throw std::invalid_argument("conditional_logdensity: frozen vector has the wrong dimension");
  }
  return LogTarget(
      indices.size(),
      [joint, indices, full = frozen_full](const Vector& part) mutable {
        detail::scatter(full, indices, part);
        return joint(full);
      },
      joint.name() + "|block");
}

GibbsSampler::GibbsSampler(LogTarget joint, std::vector<BlockSpec> blocks, RefreshPolicy policy,
                           std::uint64_t max_tries)
    : joint_(std::move(joint)), blocks_(std::move(blocks)), policy_(policy), max_tries_(max_tries) {
  if (blocks_.empty()) throw std::invalid_argument("GibbsSampler: no blocks");
  std::vector<int> hits(joint_.dim(), 0);
  for (const auto& b : blocks_) {
    if (b.indices.empty()) throw std::invalid_argument("GibbsSampler: block '" + b.name + "' is empty");
    for (auto i : b.indices) {
      if (i >= joint_.dim()) throw std::invalid_argument("GibbsSampler: block '" + b.name + "' index out of range");
      ++hits[i];
    }
    if (b.proposal.dim() != b.indices.size()) {
      throw std::invalid_argument("GibbsSampler: block '" + b.name + "' proposal dimension mismatch");
    }
    if (b.kernel == BlockKernel::tempered) {
      if (!b.ladder) throw std::invalid_argument("GibbsSampler: tempered block '" + b.name + "' has no ladder");
      if (b.ladder->proposal(0).dim() != b.indices.size()) {
        throw std::invalid_argument("GibbsSampler: block '" + b.name + "' ladder dimension mismatch");
      }
    }
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i] != 1) {
      throw std::invalid_argument("GibbsSampler: coordinate " + std::to_string(i) +
                                  (hits[i] == 0 ? " is not covered by any block" : " is in several blocks"));
    }
  }
}

GibbsState GibbsSampler::init(const Vector& x0, EvalCounter& counter) const {
  GibbsState s;
  s.x = x0;
  s.joint_logpi = eval_logpi(joint_, x0, counter, Phase::other);
  for (const auto& b : blocks_) {
    s.aux.push_back(detail::gather(x0, b.indices));
    s.aux_logpi.push_back(s.joint_logpi);
    s.seen.push_back(0);
  }
  return s;
}

}  // namespace ram
