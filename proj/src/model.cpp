#include "entlink/model.hpp"

#include <cmath>
#include <limits>

#include "entlink/alias.hpp"

namespace entlink {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void Hyperparameters::validate(int attributes) const {
  if (entities < 1) throw ConfigError("entity count must be at least 1");
  if (alpha.size() != static_cast<std::size_t>(attributes) ||
      beta.size() != static_cast<std::size_t>(attributes)) {
    throw ConfigError("alpha/beta must have one entry per attribute");
  }
  for (int a = 0; a < attributes; ++a) {
    if (!(alpha[static_cast<std::size_t>(a)] > 0.0) ||
        !(beta[static_cast<std::size_t>(a)] > 0.0)) {
      throw ConfigError("alpha and beta must be positive");
    }
  }
}

Hyperparameters default_hyperparameters(const Corpus& corpus) {
  const auto R = static_cast<double>(corpus.records());
  Hyperparameters hyper;
  hyper.entities = corpus.records();
  hyper.alpha.assign(static_cast<std::size_t>(corpus.attributes()), R * 0.1 * 0.01);
  hyper.beta.assign(static_cast<std::size_t>(corpus.attributes()), R * 0.1);
  return hyper;
}

ModelState init_state(const Corpus& corpus, const Hyperparameters& hyper,
                      const BlockingTree& tree, const Empirical& phi,
                      std::uint64_t seed) {
  const int R = corpus.records();
  const int A = corpus.attributes();
  hyper.validate(A);

  ModelState state;
  state.E = hyper.entities;
  state.A = A;
  state.R = R;
  state.T = corpus.tables();

  Rng rng = Rng::keyed(seed, /*tag=*/0x696e6974ULL, 0);
  std::vector<AliasTable> phi_alias;
  phi_alias.reserve(static_cast<std::size_t>(A));
  for (int a = 0; a < A; ++a) phi_alias.emplace_back(phi[static_cast<std::size_t>(a)]);

  state.Y.resize(static_cast<std::size_t>(state.E) * static_cast<std::size_t>(A));
  for (int e = 0; e < state.E; ++e) {
    for (int a = 0; a < A; ++a) {
      if (e < R && corpus.observed(e, a)) {
        state.y(e, a) = corpus.value(e, a);
      } else {
        state.y(e, a) =
            static_cast<ValueId>(phi_alias[static_cast<std::size_t>(a)].draw(rng));
      }
    }
  }

  state.theta.resize(static_cast<std::size_t>(state.T) * static_cast<std::size_t>(A));
  for (int t = 0; t < state.T; ++t) {
    for (int a = 0; a < A; ++a) {
      const auto ai = static_cast<std::size_t>(a);
      state.th(t, a) = hyper.alpha[ai] / (hyper.alpha[ai] + hyper.beta[ai]);
    }
  }

  state.lambda.resize(static_cast<std::size_t>(R));
  state.gamma.resize(static_cast<std::size_t>(R));
  state.Z.assign(static_cast<std::size_t>(R) * static_cast<std::size_t>(A), 0);
  for (int r = 0; r < R; ++r) {
    const int e = r % state.E;  // identity seeding when E >= R
    state.lambda[static_cast<std::size_t>(r)] = e;
    state.gamma[static_cast<std::size_t>(r)] =
        tree.assign(&state.Y[static_cast<std::size_t>(e) * static_cast<std::size_t>(A)]);
    int t = corpus.rec_table[static_cast<std::size_t>(r)];
    for (int a = 0; a < A; ++a) {
      if (!corpus.observed(r, a)) {
        state.z(r, a) = rng.bernoulli(state.th(t, a)) ? 1 : 0;
      } else if (corpus.value(r, a) != state.y(e, a)) {
        state.z(r, a) = 1;  // only possible when records share a seed entity
      }
    }
  }
  return state;
}

void validate_state(const ModelState& state, const Corpus& corpus,
                    const BlockingTree& tree) {
  const int R = corpus.records();
  const int A = corpus.attributes();
  if (state.R != R || state.A != A || state.T != corpus.tables()) {
    throw RuntimeAbort("state shape does not match corpus");
  }
  if (state.Y.size() != static_cast<std::size_t>(state.E) * static_cast<std::size_t>(A) ||
      state.lambda.size() != static_cast<std::size_t>(R) ||
      state.gamma.size() != static_cast<std::size_t>(R) ||
      state.Z.size() != static_cast<std::size_t>(R) * static_cast<std::size_t>(A) ||
      state.theta.size() !=
          static_cast<std::size_t>(state.T) * static_cast<std::size_t>(A)) {
    throw RuntimeAbort("state array sizes inconsistent");
  }
  for (int e = 0; e < state.E; ++e) {
    for (int a = 0; a < A; ++a) {
      ValueId v = state.y(e, a);
      if (v < 0 ||
          static_cast<std::size_t>(v) >= corpus.dictionaries[static_cast<std::size_t>(a)].size()) {
        throw RuntimeAbort("entity attribute out of dictionary range");
      }
    }
  }
  for (double th : state.theta) {
    if (!(th > 0.0 && th < 1.0)) throw RuntimeAbort("theta outside (0,1)");
  }
  for (int r = 0; r < R; ++r) {
    int e = state.lambda[static_cast<std::size_t>(r)];
    if (e < 0 || e >= state.E) throw RuntimeAbort("lambda out of range");
    int expect = tree.assign(&state.Y[static_cast<std::size_t>(e) *
                                      static_cast<std::size_t>(A)]);
    if (state.gamma[static_cast<std::size_t>(r)] != expect) {
      throw RuntimeAbort("gamma inconsistent with blockfn(y_lambda)");
    }
    for (int a = 0; a < A; ++a) {
      std::uint8_t z = state.z(r, a);
      if (z > 1) throw RuntimeAbort("z not binary");
      if (corpus.observed(r, a) && z == 0 && corpus.value(r, a) != state.y(e, a)) {
        throw RuntimeAbort("undistorted observed cell disagrees with entity");
      }
    }
  }
}

namespace {

/// Shared factors: entity prior, per-cell distortion indicators (theta
/// handling delegated), observed-cell hit-miss terms, and the 1/E link
/// prior. Gamma support is checked only when a tree is supplied.
double log_core(const ModelState& state, const Corpus& corpus,
                const SimilarityCache& cache, const Empirical& phi,
                const Hyperparameters& hyper, const BlockingTree* tree,
                bool collapse_theta) {
  const int R = state.R;
  const int A = state.A;
  double total = 0.0;

  for (int e = 0; e < state.E; ++e) {
    for (int a = 0; a < A; ++a) {
      double p = phi[static_cast<std::size_t>(a)][static_cast<std::size_t>(state.y(e, a))];
      if (p <= 0.0) return kNegInf;
      total += std::log(p);
    }
  }

  total -= static_cast<double>(R) * std::log(static_cast<double>(state.E));

  for (int r = 0; r < R; ++r) {
    int e = state.lambda[static_cast<std::size_t>(r)];
    if (e < 0 || e >= state.E) return kNegInf;
    if (tree) {
      int expect = tree->assign(
          &state.Y[static_cast<std::size_t>(e) * static_cast<std::size_t>(A)]);
      if (state.gamma[static_cast<std::size_t>(r)] != expect) return kNegInf;
    }
    for (int a = 0; a < A; ++a) {
      if (!corpus.observed(r, a)) continue;
      ValueId x = corpus.value(r, a);
      ValueId yv = state.y(e, a);
      if (state.z(r, a) == 0) {
        if (x != yv) return kNegInf;
      } else {
        double psi = cache.psi(a, x, yv, phi);
        if (psi <= 0.0) return kNegInf;
        total += std::log(psi);
      }
    }
  }

  if (collapse_theta) {
    // Beta-Binomial collapse per (table, attribute).
    for (int t = 0; t < state.T; ++t) {
      for (int a = 0; a < A; ++a) {
        const auto ai = static_cast<std::size_t>(a);
        double alpha = hyper.alpha[ai];
        double beta = hyper.beta[ai];
        double z_sum = 0.0, cells = 0.0;
        for (int r = 0; r < R; ++r) {
          if (corpus.rec_table[static_cast<std::size_t>(r)] != t) continue;
          z_sum += state.z(r, a);
          cells += 1.0;
        }
        total += std::lgamma(z_sum + alpha) + std::lgamma(cells - z_sum + beta) -
                 std::lgamma(cells + alpha + beta) -
                 (std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta));
      }
    }
  } else {
    for (int t = 0; t < state.T; ++t) {
      for (int a = 0; a < A; ++a) {
        const auto ai = static_cast<std::size_t>(a);
        double th = state.th(t, a);
        if (!(th > 0.0 && th < 1.0)) return kNegInf;
        total += (hyper.alpha[ai] - 1.0) * std::log(th) +
                 (hyper.beta[ai] - 1.0) * std::log1p(-th);
      }
    }
    for (int r = 0; r < R; ++r) {
      int t = corpus.rec_table[static_cast<std::size_t>(r)];
      for (int a = 0; a < A; ++a) {
        double th = state.th(t, a);
        total += state.z(r, a) ? std::log(th) : std::log1p(-th);
      }
    }
  }
  return total;
}

}  // namespace

double log_joint(const ModelState& state, const Corpus& corpus,
                 const SimilarityCache& cache, const Empirical& phi,
                 const Hyperparameters& hyper, const BlockingTree& tree) {
  return log_core(state, corpus, cache, phi, hyper, &tree, false);
}

double log_joint_collapsed(const ModelState& state, const Corpus& corpus,
                           const SimilarityCache& cache, const Empirical& phi,
                           const Hyperparameters& hyper, const BlockingTree& tree) {
  return log_core(state, corpus, cache, phi, hyper, &tree, true);
}

double blink_log_joint(const ModelState& state, const Corpus& corpus,
                       const SimilarityCache& cache, const Empirical& phi,
                       const Hyperparameters& hyper) {
  return log_core(state, corpus, cache, phi, hyper, nullptr, false);
}

}  // namespace entlink
