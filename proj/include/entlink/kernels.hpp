#pragma once

#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "entlink/alias.hpp"
#include "entlink/blocking.hpp"
#include "entlink/corpus.hpp"
#include "entlink/model.hpp"
#include "entlink/perturbation.hpp"
#include "entlink/rng.hpp"
#include "entlink/similarity.hpp"

namespace entlink {

/// Per-block, per-attribute map value -> entities currently holding that
/// value. Powers candidate pruning for the link update.
class InvertedIndex {
 public:
  InvertedIndex() = default;
  explicit InvertedIndex(int attributes) : maps_(static_cast<std::size_t>(attributes)) {}

  void rebuild(const ModelState& state, const std::vector<int>& entities);
  void insert_entity(const ModelState& state, int e);
  void erase_entity(const ModelState& state, int e);
  void update_value(int a, ValueId old_v, ValueId new_v, int e);

  /// Null when no entity holds the value.
  const std::unordered_set<int>* posting(int a, ValueId v) const {
    auto it = maps_[static_cast<std::size_t>(a)].find(v);
    return it == maps_[static_cast<std::size_t>(a)].end() ? nullptr : &it->second;
  }

  bool same_contents(const InvertedIndex& other) const;

 private:
  std::vector<std::unordered_map<ValueId, std::unordered_set<int>>> maps_;
};

/// Prebuilt alias samplers for the entity-update base distributions
/// q_{a,n}(v) proportional to phi_a(v) h_a(v)^n, n = 0..n_max. Constant
/// measure attributes factor out their normalizer, so a single table (q =
/// phi) serves every n. Immutable after build; n beyond n_max is handled by
/// the kernels with on-the-fly normalization.
class BaseTables {
 public:
  static BaseTables build(const SimilarityCache& cache, const Empirical& phi,
                          int n_max = 10);

  int n_max() const { return n_max_; }
  bool covers(int a, int n) const {
    return constant_[static_cast<std::size_t>(a)] || n <= n_max_;
  }
  const AliasTable& alias(int a, int n) const { return entry(a, n).sampler; }
  double q(int a, int n, ValueId v) const {
    return entry(a, n).pmf[static_cast<std::size_t>(v)];
  }

 private:
  struct PerN {
    AliasTable sampler;
    std::vector<double> pmf;
  };
  const PerN& entry(int a, int n) const {
    const auto& per_attr = attrs_[static_cast<std::size_t>(a)];
    int i = constant_[static_cast<std::size_t>(a)] ? 0 : n;
    return per_attr[static_cast<std::size_t>(i)];
  }
  std::vector<std::vector<PerN>> attrs_;
  std::vector<bool> constant_;
  int n_max_ = 0;
};

/// Read-only inputs shared by all kernels.
struct KernelContext {
  const Corpus* corpus = nullptr;
  const SimilarityCache* cache = nullptr;
  const Empirical* phi = nullptr;
  const Hyperparameters* hyper = nullptr;
  const BlockingTree* tree = nullptr;
  const BaseTables* base = nullptr;
};

/// Beta(z_sum + alpha, cells - z_sum + beta) draw for one (table, attribute).
double update_theta(long z_sum, long cells, double alpha, double beta, Rng& rng);

/// Distortion indicator draw for one cell: Bernoulli(theta) when the cell is
/// missing; 1 when an observed value disagrees with the entity; otherwise
/// Bernoulli(theta psi / (theta psi - theta + 1)).
std::uint8_t draw_z_cell(const ModelState& state, const KernelContext& ctx, int r,
                         int a, Rng& rng);

/// Support of the link update: intersection of inverted-index postings over
/// undistorted observed attributes (smallest set first), or the whole block
/// when every observed attribute is distorted. Sorted.
std::vector<int> candidate_links(const ModelState& state, const KernelContext& ctx,
                                 const InvertedIndex& index,
                                 const std::vector<int>& block_entities, int r);

/// Link draw over the candidate set with z-conditioned weights
/// prod over observed a of {(1-z) 1[x=y] + z psi(x|y)}. Writes lambda.
int update_lambda_gibbs(ModelState& state, const KernelContext& ctx,
                        const InvertedIndex& index,
                        const std::vector<int>& block_entities, int r, Rng& rng);

/// Same distribution via a full-block scan (pruning oracle and baseline).
int update_lambda_naive(ModelState& state, const KernelContext& ctx,
                        const std::vector<int>& block_entities, int r, Rng& rng);

/// Link draw with z marginalized: weights prod over observed a of
/// {(1-theta) 1[x=y] + theta psi(x|y)} over the whole block.
int update_lambda_pcg2(ModelState& state, const KernelContext& ctx,
                       const std::vector<int>& block_entities, int r, Rng& rng);

/// One entity-attribute draw. `records` lists the records linked to e.
/// condition_on_z fixes the distortion indicators (plain Gibbs move);
/// otherwise they are marginalized. Does not mutate the state.
ValueId draw_entity_value(const ModelState& state, const KernelContext& ctx, int e,
                          int a, const std::vector<int>& records,
                          bool condition_on_z, Rng& rng);

/// Joint move: redraws every y_ea, deterministically reassigns the linked
/// records' block, and (in the marginalized variant) resamples their
/// distortion indicators. Updates the inverted index when given. Returns
/// the entity's new block id.
int update_entity_joint(ModelState& state, const KernelContext& ctx, int e,
                        const std::vector<int>& records, bool condition_on_z,
                        InvertedIndex* index, Rng& rng);

}  // namespace entlink
