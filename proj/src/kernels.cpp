#include "entlink/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace entlink {

void InvertedIndex::rebuild(const ModelState& state, const std::vector<int>& entities) {
  for (auto& m : maps_) m.clear();
  maps_.resize(static_cast<std::size_t>(state.A));
  for (int e : entities) insert_entity(state, e);
}

void InvertedIndex::insert_entity(const ModelState& state, int e) {
  for (int a = 0; a < state.A; ++a) {
    maps_[static_cast<std::size_t>(a)][state.y(e, a)].insert(e);
  }
}

void InvertedIndex::erase_entity(const ModelState& state, int e) {
  for (int a = 0; a < state.A; ++a) {
    auto& m = maps_[static_cast<std::size_t>(a)];
    auto it = m.find(state.y(e, a));
    if (it == m.end() || it->second.erase(e) == 0) {
      throw RuntimeAbort("inverted index missing entity on erase");
    }
    if (it->second.empty()) m.erase(it);
  }
}

void InvertedIndex::update_value(int a, ValueId old_v, ValueId new_v, int e) {
  if (old_v == new_v) return;
  auto& m = maps_[static_cast<std::size_t>(a)];
  auto it = m.find(old_v);
  if (it == m.end() || it->second.erase(e) == 0) {
    throw RuntimeAbort("inverted index missing entity on value change");
  }
  if (it->second.empty()) m.erase(it);
  m[new_v].insert(e);
}

bool InvertedIndex::same_contents(const InvertedIndex& other) const {
  if (maps_.size() != other.maps_.size()) return false;
  for (std::size_t a = 0; a < maps_.size(); ++a) {
    if (maps_[a].size() != other.maps_[a].size()) return false;
    for (const auto& [v, set] : maps_[a]) {
      auto it = other.maps_[a].find(v);
      if (it == other.maps_[a].end() || it->second != set) return false;
    }
  }
  return true;
}

BaseTables BaseTables::build(const SimilarityCache& cache, const Empirical& phi,
                             int n_max) {
  BaseTables tables;
  tables.n_max_ = n_max;
  const int A = cache.attributes();
  tables.attrs_.resize(static_cast<std::size_t>(A));
  tables.constant_.resize(static_cast<std::size_t>(A));
  for (int a = 0; a < A; ++a) {
    const AttributeCache& attr = cache.attr(a);
    tables.constant_[static_cast<std::size_t>(a)] = attr.constant;
    auto& per_attr = tables.attrs_[static_cast<std::size_t>(a)];
    const auto& p = phi[static_cast<std::size_t>(a)];
    const int levels = attr.constant ? 1 : n_max + 1;
    per_attr.reserve(static_cast<std::size_t>(levels));
    for (int n = 0; n < levels; ++n) {
      std::vector<double> pmf(p.size());
      double total = 0.0;
      for (std::size_t v = 0; v < p.size(); ++v) {
        pmf[v] = p[v] * std::pow(attr.eff_h(static_cast<ValueId>(v)), n);
        total += pmf[v];
      }
      for (double& x : pmf) x /= total;
      AliasTable sampler(pmf);
      per_attr.push_back(PerN{std::move(sampler), std::move(pmf)});
    }
  }
  return tables;
}

double update_theta(long z_sum, long cells, double alpha, double beta, Rng& rng) {
  if (z_sum < 0 || z_sum > cells) throw RuntimeAbort("distortion count out of range");
  return rng.beta(static_cast<double>(z_sum) + alpha,
                  static_cast<double>(cells - z_sum) + beta);
}

std::uint8_t draw_z_cell(const ModelState& state, const KernelContext& ctx, int r,
                         int a, Rng& rng) {
  const int t = ctx.corpus->rec_table[static_cast<std::size_t>(r)];
  const double theta = state.th(t, a);
  if (!ctx.corpus->observed(r, a)) return rng.bernoulli(theta) ? 1 : 0;
  const ValueId x = ctx.corpus->value(r, a);
  const ValueId yv = state.y(state.lambda[static_cast<std::size_t>(r)], a);
  if (x != yv) return 1;
  const double psi = ctx.cache->psi(a, x, yv, *ctx.phi);
  const double zeta = theta * psi / (theta * psi - theta + 1.0);
  return rng.bernoulli(zeta) ? 1 : 0;
}

std::vector<int> candidate_links(const ModelState& state, const KernelContext& ctx,
                                 const InvertedIndex& index,
                                 const std::vector<int>& block_entities, int r) {
  std::vector<const std::unordered_set<int>*> postings;
  for (int a = 0; a < state.A; ++a) {
    if (!ctx.corpus->observed(r, a) || state.z(r, a) != 0) continue;
    const auto* posting = index.posting(a, ctx.corpus->value(r, a));
    if (posting == nullptr) return {};
    postings.push_back(posting);
  }
  if (postings.empty()) return block_entities;

  std::sort(postings.begin(), postings.end(),
            [](const auto* x, const auto* y) { return x->size() < y->size(); });
  std::vector<int> result;
  result.reserve(postings.front()->size());
  for (int e : *postings.front()) {
    bool in_all = true;
    for (std::size_t i = 1; in_all && i < postings.size(); ++i) {
      in_all = postings[i]->count(e) != 0;
    }
    if (in_all) result.push_back(e);
  }
  std::sort(result.begin(), result.end());
  return result;
}

namespace {

double link_weight_given_z(const ModelState& state, const KernelContext& ctx, int r,
                           int e, bool skip_undistorted) {
  double w = 1.0;
  for (int a = 0; a < state.A; ++a) {
    if (!ctx.corpus->observed(r, a)) continue;
    ValueId x = ctx.corpus->value(r, a);
    if (state.z(r, a) == 0) {
      if (skip_undistorted) continue;  // candidates already match here
      if (x != state.y(e, a)) return 0.0;
    } else {
      w *= ctx.cache->psi(a, x, state.y(e, a), *ctx.phi);
    }
  }
  return w;
}

int draw_weighted(const std::vector<int>& ids, const std::vector<double>& weights,
                  double total, Rng& rng) {
  if (!(total > 0.0)) {
    throw RuntimeAbort("link update has no positive-weight candidate");
  }
  double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    acc += weights[i];
    if (u < acc) return ids[i];
  }
  return ids.back();
}

}  // namespace

int update_lambda_gibbs(ModelState& state, const KernelContext& ctx,
                        const InvertedIndex& index,
                        const std::vector<int>& block_entities, int r, Rng& rng) {
  auto candidates = candidate_links(state, ctx, index, block_entities, r);
  std::vector<double> weights(candidates.size());
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    weights[i] = link_weight_given_z(state, ctx, r, candidates[i],
                                     /*skip_undistorted=*/true);
    total += weights[i];
  }
  int e = draw_weighted(candidates, weights, total, rng);
  state.lambda[static_cast<std::size_t>(r)] = e;
  return e;
}

int update_lambda_naive(ModelState& state, const KernelContext& ctx,
                        const std::vector<int>& block_entities, int r, Rng& rng) {
  std::vector<double> weights(block_entities.size());
  double total = 0.0;
  for (std::size_t i = 0; i < block_entities.size(); ++i) {
    weights[i] = link_weight_given_z(state, ctx, r, block_entities[i],
                                     /*skip_undistorted=*/false);
    total += weights[i];
  }
  int e = draw_weighted(block_entities, weights, total, rng);
  state.lambda[static_cast<std::size_t>(r)] = e;
  return e;
}

int update_lambda_pcg2(ModelState& state, const KernelContext& ctx,
                       const std::vector<int>& block_entities, int r, Rng& rng) {
  const int t = ctx.corpus->rec_table[static_cast<std::size_t>(r)];
  std::vector<double> weights(block_entities.size());
  double total = 0.0;
  for (std::size_t i = 0; i < block_entities.size(); ++i) {
    int e = block_entities[i];
    double w = 1.0;
    for (int a = 0; a < state.A; ++a) {
      if (!ctx.corpus->observed(r, a)) continue;
      ValueId x = ctx.corpus->value(r, a);
      double theta = state.th(t, a);
      double term = theta * ctx.cache->psi(a, x, state.y(e, a), *ctx.phi);
      if (x == state.y(e, a)) term += 1.0 - theta;
      w *= term;
    }
    weights[i] = w;
    total += w;
  }
  int e = draw_weighted(block_entities, weights, total, rng);
  state.lambda[static_cast<std::size_t>(r)] = e;
  return e;
}

namespace {

struct ObsCell {
  ValueId x;
  double theta;
};

/// Exact O(|V| n) fallback: direct normalization of the target conditional.
ValueId draw_entity_value_direct(const KernelContext& ctx, int a,
                                 const std::vector<ObsCell>& cells,
                                 bool condition_on_z, Rng& rng) {
  const auto& p = (*ctx.phi)[static_cast<std::size_t>(a)];
  std::vector<double> weights(p.size());
  double total = 0.0;
  for (std::size_t v = 0; v < p.size(); ++v) {
    double w = p[v];
    for (const ObsCell& cell : cells) {
      double psi = ctx.cache->psi(a, cell.x, static_cast<ValueId>(v), *ctx.phi);
      if (condition_on_z) {
        w *= psi;
      } else {
        double term = cell.theta * psi;
        if (cell.x == static_cast<ValueId>(v)) term += 1.0 - cell.theta;
        w *= term;
      }
    }
    weights[static_cast<std::size_t>(v)] = w;
    total += w;
  }
  double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t v = 0; v < p.size(); ++v) {
    acc += weights[v];
    if (u < acc) return static_cast<ValueId>(v);
  }
  return static_cast<ValueId>(p.size() - 1);
}

}  // namespace

ValueId draw_entity_value(const ModelState& state, const KernelContext& ctx, int e,
                          int a, const std::vector<int>& records,
                          bool condition_on_z, Rng& rng) {
  const AttributeCache& attr = ctx.cache->attr(a);
  const auto& p = (*ctx.phi)[static_cast<std::size_t>(a)];

  std::vector<ObsCell> cells;
  cells.reserve(records.size());
  for (int r : records) {
    if (!ctx.corpus->observed(r, a)) continue;
    if (condition_on_z && state.z(r, a) == 0) {
      // Undistorted observed cell pins the entity value.
      return ctx.corpus->value(r, a);
    }
    if (condition_on_z && state.z(r, a) != 1) continue;
    int t = ctx.corpus->rec_table[static_cast<std::size_t>(r)];
    cells.push_back(ObsCell{ctx.corpus->value(r, a), state.th(t, a)});
  }
  (void)e;

  const int n = static_cast<int>(cells.size());
  if (n == 0) {
    // Empty product: plain draw from phi (equals q_{a,0}).
    return static_cast<ValueId>(ctx.base->alias(a, 0).draw(rng));
  }
  if (!ctx.base->covers(a, n)) {
    return draw_entity_value_direct(ctx, a, cells, condition_on_z, rng);
  }

  // Perturbation support: observed linked values plus their positive-
  // similarity neighbors (constant attributes contribute the value alone,
  // and only when the indicator term is active).
  std::vector<std::size_t> support;
  for (const ObsCell& cell : cells) {
    if (!attr.constant || !condition_on_z) {
      support.push_back(static_cast<std::size_t>(cell.x));
    }
    if (!attr.constant) {
      for (const auto& [v, ts] : attr.neighbors[static_cast<std::size_t>(cell.x)]) {
        support.push_back(static_cast<std::size_t>(v));
      }
    }
  }
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());

  std::vector<double> q_at(support.size()), eps(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto v = static_cast<ValueId>(support[i]);
    double prod = 1.0;
    for (const ObsCell& cell : cells) {
      double term = std::exp(attr.eff_trunc_sim(cell.x, v));
      if (!condition_on_z && cell.x == v) {
        term += (1.0 / cell.theta - 1.0) /
                (p[static_cast<std::size_t>(cell.x)] * attr.eff_h(cell.x));
      }
      prod *= term;
    }
    eps[i] = prod - 1.0;
    q_at[i] = ctx.base->q(a, n, v);
  }

  PerturbationContext pctx;
  pctx.base = &ctx.base->alias(a, n);
  pctx.support = support;
  pctx.q_at_support = q_at;
  pctx.eps = eps;
  return static_cast<ValueId>(perturbation_draw(pctx, rng));
}

int update_entity_joint(ModelState& state, const KernelContext& ctx, int e,
                        const std::vector<int>& records, bool condition_on_z,
                        InvertedIndex* index, Rng& rng) {
  for (int a = 0; a < state.A; ++a) {
    ValueId old_v = state.y(e, a);
    ValueId new_v = draw_entity_value(state, ctx, e, a, records, condition_on_z, rng);
    if (new_v != old_v) {
      state.y(e, a) = new_v;
      if (index) index->update_value(a, old_v, new_v, e);
    }
    if (!condition_on_z) {
      for (int r : records) {
        state.z(r, a) = draw_z_cell(state, ctx, r, a, rng);
      }
    }
  }
  int block = ctx.tree->assign(
      &state.Y[static_cast<std::size_t>(e) * static_cast<std::size_t>(state.A)]);
  for (int r : records) state.gamma[static_cast<std::size_t>(r)] = block;
  return block;
}

}  // namespace entlink
