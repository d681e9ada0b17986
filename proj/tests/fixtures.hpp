#pragma once

#include <vector>

#include "entlink/kernels.hpp"
#include "entlink/model.hpp"

namespace entlink::testing {

/// Small self-consistent sampling instance with all derived structures.
struct Instance {
  Corpus corpus;
  Empirical phi;
  SimilarityCache cache;
  Hyperparameters hyper;
  BlockingTree tree;
  BaseTables base;
  ModelState state;
  std::vector<std::vector<int>> block_entities;  // per block, sorted
  std::vector<std::vector<int>> entity_records;  // per entity, sorted
  std::vector<InvertedIndex> index;              // per block

  KernelContext ctx() const {
    return KernelContext{&corpus, &cache, &phi, &hyper, &tree, &base};
  }

  void rebuild_derived() {
    block_entities.assign(static_cast<std::size_t>(tree.blocks()), {});
    for (int e = 0; e < state.E; ++e) {
      int b = tree.assign(&state.Y[static_cast<std::size_t>(e) *
                                   static_cast<std::size_t>(state.A)]);
      block_entities[static_cast<std::size_t>(b)].push_back(e);
    }
    entity_records.assign(static_cast<std::size_t>(state.E), {});
    for (int r = 0; r < state.R; ++r) {
      entity_records[static_cast<std::size_t>(state.lambda[static_cast<std::size_t>(r)])]
          .push_back(r);
    }
    index.assign(static_cast<std::size_t>(tree.blocks()),
                 InvertedIndex(state.A));
    for (int b = 0; b < tree.blocks(); ++b) {
      index[static_cast<std::size_t>(b)].rebuild(state,
                                                 block_entities[static_cast<std::size_t>(b)]);
    }
  }
};

struct InstanceOptions {
  int records = 12;
  int entities = 8;
  int depth = 1;
  int string_domain = 12;
  int cat_domain = 4;
  double theta_gen = 0.3;
  double eta_gen = 0.85;
  int base_n_max = 10;
};

inline Instance make_instance(std::uint64_t seed, const InstanceOptions& opt = {}) {
  Instance inst;
  GeneratorConfig cfg;
  cfg.attributes = {
      {"fn", AttributeKind::String, opt.string_domain, 0.8, 10.0, 6.0, {}, {}},
      {"cat", AttributeKind::Categorical, opt.cat_domain, 0.7, 10.0, 0.0, {}, {}}};
  cfg.table_sizes = {opt.records};
  cfg.entities = opt.entities;
  cfg.theta = {opt.theta_gen};
  cfg.eta = {opt.eta_gen};
  inst.corpus = generate_synthetic(cfg, seed);
  inst.phi = empirical_distributions(inst.corpus);
  inst.cache = SimilarityCache::build(inst.corpus, inst.phi);
  inst.hyper = default_hyperparameters(inst.corpus);
  inst.hyper.entities = opt.entities >= opt.records ? opt.entities : opt.records;
  inst.tree = fit_tree(inst.corpus, {0, 1}, opt.depth);
  inst.base = BaseTables::build(inst.cache, inst.phi, opt.base_n_max);
  inst.state = init_state(inst.corpus, inst.hyper, inst.tree, inst.phi, seed + 1);
  inst.rebuild_derived();
  return inst;
}

/// Replaces the latent state with a random valid configuration.
inline void randomize_state(Instance& inst, Rng& rng) {
  ModelState& s = inst.state;
  for (int e = 0; e < s.E; ++e) {
    for (int a = 0; a < s.A; ++a) {
      const auto& dict = inst.corpus.dictionaries[static_cast<std::size_t>(a)];
      ValueId v;
      do {
        v = static_cast<ValueId>(rng.uniform_index(dict.size()));
      } while (inst.phi[static_cast<std::size_t>(a)][static_cast<std::size_t>(v)] <= 0.0);
      s.y(e, a) = v;
    }
  }
  for (int r = 0; r < s.R; ++r) {
    int e = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(s.E)));
    s.lambda[static_cast<std::size_t>(r)] = e;
    s.gamma[static_cast<std::size_t>(r)] = inst.tree.assign(
        &s.Y[static_cast<std::size_t>(e) * static_cast<std::size_t>(s.A)]);
    for (int a = 0; a < s.A; ++a) {
      if (inst.corpus.observed(r, a) && inst.corpus.value(r, a) != s.y(e, a)) {
        s.z(r, a) = 1;
      } else {
        s.z(r, a) = rng.bernoulli(0.5) ? 1 : 0;
      }
    }
  }
  for (double& th : s.theta) th = 0.05 + 0.9 * rng.uniform();
  inst.rebuild_derived();
}

}  // namespace entlink::testing
