#pragma once

#include <cstddef>
#include <span>

#include "entlink/alias.hpp"
#include "entlink/rng.hpp"

namespace entlink {

/// Mixture decomposition of a target pmf p(x) proportional to
/// q(x) (1 + eps(x)): a fixed base pmf q with a prebuilt alias sampler,
/// plus a perturbation pmf v(x) = c q(x) eps(x) on the small support
/// X* = {x : eps(x) > 0}, where 1/c = sum over X* of q(x) eps(x).
struct PerturbationContext {
  const AliasTable* base = nullptr;      // alias sampler for q over all of X
  std::span<const std::size_t> support;  // X*, indices into X
  std::span<const double> q_at_support;  // q(x) for x in X*, normalized
  std::span<const double> eps;           // eps(x) for x in X*, nonnegative
};

/// One draw from p; O(|X*|) plus an O(1) base draw. An empty support (or
/// eps identically zero) degenerates to a pure base draw.
std::size_t perturbation_draw(const PerturbationContext& ctx, Rng& rng);

}  // namespace entlink
