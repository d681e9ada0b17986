#include "entlink/alias.hpp"

#include <cmath>
#include <stdexcept>

namespace entlink {

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("alias: empty weight vector");

  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("alias: weights must be finite and nonnegative");
    }
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("alias: all weights are zero");

  prob_.assign(n, 0.0);
  alias_.assign(n, 0);

  // Scaled probabilities with mean 1.
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * n / total;

  std::vector<std::uint32_t> small, large;
  small.reserve(n);
  large.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Ties at 1.0 go to the small list.
    if (scaled[i] <= 1.0) {
      small.push_back(static_cast<std::uint32_t>(i));
    } else {
      large.push_back(static_cast<std::uint32_t>(i));
    }
  }

  while (!small.empty() && !large.empty()) {
    std::uint32_t s = small.back();
    small.pop_back();
    std::uint32_t l = large.back();
    large.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] <= 1.0) {
      small.push_back(l);
    } else {
      large.push_back(l);
    }
  }
  while (!large.empty()) {
    prob_[large.back()] = 1.0;
    large.pop_back();
  }
  while (!small.empty()) {
    prob_[small.back()] = 1.0;
    small.pop_back();
  }
}

}  // namespace entlink
