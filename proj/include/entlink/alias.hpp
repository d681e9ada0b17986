#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "entlink/rng.hpp"

namespace entlink {

/// Vose alias table for O(1) draws from a fixed discrete distribution.
/// Construction is O(n) using the two-worklist (small/large) method.
class AliasTable {
 public:
  /// Weights must be nonnegative, finite, and not all zero.
  explicit AliasTable(std::span<const double> weights);

  /// One uniform index draw plus one threshold comparison.
  std::size_t draw(Rng& rng) const {
    std::size_t i = rng.uniform_index(prob_.size());
    return rng.uniform() < prob_[i] ? i : alias_[i];
  }

  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace entlink
