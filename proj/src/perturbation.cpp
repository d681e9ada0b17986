#include "entlink/perturbation.hpp"

#include <stdexcept>

namespace entlink {

std::size_t perturbation_draw(const PerturbationContext& ctx, Rng& rng) {
  if (ctx.base == nullptr) throw std::invalid_argument("perturbation: no base pmf");
  double c_inv = 0.0;
  for (std::size_t i = 0; i < ctx.support.size(); ++i) {
    c_inv += ctx.q_at_support[i] * ctx.eps[i];
  }
  // Mixture weight of the base component is c/(1+c) = 1/(1 + 1/c).
  if (c_inv <= 0.0 || rng.uniform() < 1.0 / (1.0 + c_inv)) {
    return ctx.base->draw(rng);
  }
  double u = rng.uniform() * c_inv;
  double acc = 0.0;
  for (std::size_t i = 0; i < ctx.support.size(); ++i) {
    acc += ctx.q_at_support[i] * ctx.eps[i];
    if (u < acc) return ctx.support[i];
  }
  return ctx.support.back();
}

}  // namespace entlink
