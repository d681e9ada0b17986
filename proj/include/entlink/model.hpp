#pragma once

#include <cstdint>
#include <vector>

#include "entlink/blocking.hpp"
#include "entlink/common.hpp"
#include "entlink/corpus.hpp"
#include "entlink/rng.hpp"
#include "entlink/similarity.hpp"

namespace entlink {

struct Hyperparameters {
  int entities = 0;           // E, latent population size
  std::vector<double> alpha;  // Beta shape per attribute
  std::vector<double> beta;

  void validate(int attributes) const;
};

/// E = R, alpha_a = R * 0.1 * 0.01, beta_a = R * 0.1 (prior mean distortion
/// probability about 1%).
Hyperparameters default_hyperparameters(const Corpus& corpus);

/// Latent state. Z is kept for every (record, attribute) cell, including
/// missing ones, so the per-table distortion counts are defined over all
/// R_t cells. Derived per-block structures live in the runtime engine.
struct ModelState {
  int E = 0, A = 0, R = 0, T = 0;
  std::vector<ValueId> Y;          // E x A entity attributes
  std::vector<int> lambda;         // R record -> entity
  std::vector<int> gamma;          // R record -> block
  std::vector<std::uint8_t> Z;     // R x A distortion indicators
  std::vector<double> theta;       // T x A distortion probabilities

  ValueId y(int e, int a) const {
    return Y[static_cast<std::size_t>(e) * static_cast<std::size_t>(A) +
             static_cast<std::size_t>(a)];
  }
  ValueId& y(int e, int a) {
    return Y[static_cast<std::size_t>(e) * static_cast<std::size_t>(A) +
             static_cast<std::size_t>(a)];
  }
  std::uint8_t z(int r, int a) const {
    return Z[static_cast<std::size_t>(r) * static_cast<std::size_t>(A) +
             static_cast<std::size_t>(a)];
  }
  std::uint8_t& z(int r, int a) {
    return Z[static_cast<std::size_t>(r) * static_cast<std::size_t>(A) +
             static_cast<std::size_t>(a)];
  }
  double th(int t, int a) const {
    return theta[static_cast<std::size_t>(t) * static_cast<std::size_t>(A) +
                 static_cast<std::size_t>(a)];
  }
  double& th(int t, int a) {
    return theta[static_cast<std::size_t>(t) * static_cast<std::size_t>(A) +
                 static_cast<std::size_t>(a)];
  }
};

/// Record r seeds entity r mod E (attributes copied from the seeding record;
/// missing cells filled from phi); entities R..E-1 drawn from phi; Z = 0 on
/// observed agreeing cells, 1 on observed disagreements (possible only when
/// E < R), and Bernoulli(prior mean) on missing ones; Theta at its prior
/// mean; Gamma follows blockfn(Y).
ModelState init_state(const Corpus& corpus, const Hyperparameters& hyper,
                      const BlockingTree& tree, const Empirical& phi,
                      std::uint64_t seed);

/// Checks all structural invariants; throws RuntimeAbort naming the first
/// violation. O(R + E).
void validate_state(const ModelState& state, const Corpus& corpus,
                    const BlockingTree& tree);

/// Unnormalized log posterior of the expanded model (entity prior, Beta
/// prior, block/link support, distortion indicators, observed-cell hit-miss
/// terms). Returns -infinity when the state is outside the support.
double log_joint(const ModelState& state, const Corpus& corpus,
                 const SimilarityCache& cache, const Empirical& phi,
                 const Hyperparameters& hyper, const BlockingTree& tree);

/// Same density with Theta integrated out analytically (Beta-Binomial
/// collapse); theta entries in the state are ignored.
double log_joint_collapsed(const ModelState& state, const Corpus& corpus,
                           const SimilarityCache& cache, const Empirical& phi,
                           const Hyperparameters& hyper, const BlockingTree& tree);

/// Unnormalized log posterior of the unblocked model: identical factors but
/// no Gamma support constraint, with the same constant 1/E per-record link
/// prior. Test oracle for the block-marginalization equivalence.
double blink_log_joint(const ModelState& state, const Corpus& corpus,
                       const SimilarityCache& cache, const Empirical& phi,
                       const Hyperparameters& hyper);

}  // namespace entlink
