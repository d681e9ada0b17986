#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "fixtures.hpp"

namespace entlink::testing {

// Link weight per the z-conditioned conditional, computed independently.
inline double oracle_link_weight(const Instance& inst, int r, int e) {
  double w = 1.0;
  for (int a = 0; a < inst.state.A; ++a) {
    if (!inst.corpus.observed(r, a)) continue;
    ValueId x = inst.corpus.value(r, a);
    ValueId yv = inst.state.y(e, a);
    if (inst.state.z(r, a) == 0) {
      if (x != yv) return 0.0;
    } else {
      w *= inst.cache.psi(a, x, yv, inst.phi);
    }
  }
  return w;
}

// Link weight with z marginalized.
inline double oracle_link_weight_marginal(const Instance& inst, int r, int e) {
  int t = inst.corpus.rec_table[static_cast<std::size_t>(r)];
  double w = 1.0;
  for (int a = 0; a < inst.state.A; ++a) {
    if (!inst.corpus.observed(r, a)) continue;
    ValueId x = inst.corpus.value(r, a);
    ValueId yv = inst.state.y(e, a);
    double theta = inst.state.th(t, a);
    double term = theta * inst.cache.psi(a, x, yv, inst.phi);
    if (x == yv) term += 1.0 - theta;
    w *= term;
  }
  return w;
}

// Entity-attribute conditional, z marginalized.
inline std::vector<double> oracle_entity_pmf(const Instance& inst, int a,
                                             const std::vector<int>& records) {
  const auto& p = inst.phi[static_cast<std::size_t>(a)];
  std::vector<double> pmf(p.size());
  double total = 0.0;
  for (std::size_t v = 0; v < p.size(); ++v) {
    double w = p[v];
    for (int r : records) {
      if (!inst.corpus.observed(r, a)) continue;
      int t = inst.corpus.rec_table[static_cast<std::size_t>(r)];
      ValueId x = inst.corpus.value(r, a);
      double theta = inst.state.th(t, a);
      double term = theta * inst.cache.psi(a, x, static_cast<ValueId>(v), inst.phi);
      if (x == static_cast<ValueId>(v)) term += 1.0 - theta;
      w *= term;
    }
    pmf[v] = w;
    total += w;
  }
  for (auto& x : pmf) x /= total;
  return pmf;
}

// Entity-attribute conditional given z.
inline std::vector<double> oracle_entity_pmf_given_z(const Instance& inst, int a,
                                                     const std::vector<int>& records) {
  const auto& p = inst.phi[static_cast<std::size_t>(a)];
  std::vector<double> pmf(p.size(), 0.0);
  ValueId forced = kMissing;
  for (int r : records) {
    if (inst.corpus.observed(r, a) && inst.state.z(r, a) == 0) {
      forced = inst.corpus.value(r, a);
      break;
    }
  }
  if (forced != kMissing) {
    pmf[static_cast<std::size_t>(forced)] = 1.0;
    return pmf;
  }
  double total = 0.0;
  for (std::size_t v = 0; v < p.size(); ++v) {
    double w = p[v];
    for (int r : records) {
      if (!inst.corpus.observed(r, a) || inst.state.z(r, a) != 1) continue;
      ValueId x = inst.corpus.value(r, a);
      w *= inst.cache.psi(a, x, static_cast<ValueId>(v), inst.phi);
    }
    pmf[v] = w;
    total += w;
  }
  for (auto& x : pmf) x /= total;
  return pmf;
}

inline double tv_counts(const std::map<int, int>& counts,
                        const std::vector<double>& pmf, int draws,
                        const std::vector<int>& ids) {
  double tv = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = counts.find(ids[i]);
    double freq = it == counts.end() ? 0.0 : it->second / static_cast<double>(draws);
    tv += std::abs(freq - pmf[i]);
  }
  return tv / 2.0;
}

}  // namespace entlink::testing
