// Acceptance harness: one line per criterion, [PASS]/[FAIL]/[SKIP].
// Exit code 0 iff no criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <vector>

#include "entlink/config.hpp"
#include "entlink/diagnostics.hpp"
#include "entlink/kernels.hpp"
#include "entlink/linkage.hpp"
#include "entlink/runtime.hpp"
#include "oracles.hpp"

using namespace entlink;
using entlink::testing::Instance;
using entlink::testing::InstanceOptions;
using entlink::testing::make_instance;
using entlink::testing::randomize_state;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": "
            << detail << std::endl;
  if (!pass) ++g_failures;
}

void report_skip(int criterion, const std::string& detail) {
  std::cout << "[SKIP] criterion " << criterion << ": " << detail << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// Small fully-categorical corpus built by hand.
Corpus make_tiny_corpus(const std::vector<std::vector<std::string>>& rows) {
  Corpus c;
  const int attributes = static_cast<int>(rows.front().size());
  for (int a = 0; a < attributes; ++a) {
    c.schema.push_back({"a" + std::to_string(a), AttributeKind::Categorical, 10.0, 0.0});
  }
  c.dictionaries.resize(static_cast<std::size_t>(attributes));
  c.dict_index.resize(static_cast<std::size_t>(attributes));
  c.table_sizes = {static_cast<int>(rows.size())};
  for (const auto& row : rows) {
    c.rec_table.push_back(0);
    for (int a = 0; a < attributes; ++a) {
      const std::string& cell = row[static_cast<std::size_t>(a)];
      c.values.push_back(cell.empty() ? kMissing : c.encode(a, cell));
    }
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Criterion 1: summing the expanded (gamma-augmented) density over all block
// assignments reproduces the unblocked density, state by state.

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  Corpus corpus = make_tiny_corpus({{"A", "X"}, {"A", "Y"}, {"B", "Z"}});
  Empirical phi = empirical_distributions(corpus);
  SimilarityCache cache = SimilarityCache::build(corpus, phi);
  Hyperparameters hyper;
  hyper.entities = 2;
  hyper.alpha = {1.0, 1.0};
  hyper.beta = {9.0, 9.0};
  BlockingTree tree = fit_tree(corpus, {0}, 1);

  const int R = 3, E = 2, A = 2;
  ModelState s;
  s.E = E;
  s.A = A;
  s.R = R;
  s.T = 1;
  s.Y.assign(static_cast<std::size_t>(E * A), 0);
  s.lambda.assign(static_cast<std::size_t>(R), 0);
  s.gamma.assign(static_cast<std::size_t>(R), 0);
  s.Z.assign(static_cast<std::size_t>(R * A), 0);
  s.theta.assign(static_cast<std::size_t>(A), 0.3);

  const int v0 = static_cast<int>(corpus.dictionaries[0].size());  // 2
  const int v1 = static_cast<int>(corpus.dictionaries[1].size());  // 3
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double worst = 0.0;
  long states = 0;

  long y_states = 1;
  for (int e = 0; e < E; ++e) y_states *= v0 * v1;
  for (long ycode = 0; ycode < y_states; ++ycode) {
    long yc = ycode;
    for (int e = 0; e < E; ++e) {
      s.y(e, 0) = static_cast<ValueId>(yc % v0);
      yc /= v0;
      s.y(e, 1) = static_cast<ValueId>(yc % v1);
      yc /= v1;
    }
    long l_states = 1;
    for (int r = 0; r < R; ++r) l_states *= E;
    for (long lcode = 0; lcode < l_states; ++lcode) {
      long lc = lcode;
      for (int r = 0; r < R; ++r) {
        s.lambda[static_cast<std::size_t>(r)] = lc % E;
        lc /= E;
      }
      for (int zcode = 0; zcode < (1 << (R * A)); ++zcode) {
        for (int i = 0; i < R * A; ++i) s.Z[static_cast<std::size_t>(i)] = (zcode >> i) & 1;

        const double lb = blink_log_joint(s, corpus, cache, phi, hyper);
        double total = 0.0;
        for (int gcode = 0; gcode < (1 << R); ++gcode) {
          for (int r = 0; r < R; ++r) {
            s.gamma[static_cast<std::size_t>(r)] = (gcode >> r) & 1;
          }
          const double lj = log_joint(s, corpus, cache, phi, hyper, tree);
          if (std::isfinite(lj)) total += std::exp(lj);
        }
        ++states;
        if (!std::isfinite(lb)) {
          if (total != 0.0) {
            report(1, false, "blocked mass on an unblocked zero state");
            return;
          }
          continue;
        }
        const double r = total / std::exp(lb);
        if (std::isnan(ratio)) ratio = r;
        worst = std::max(worst, std::abs(r - ratio) / ratio);
      }
    }
  }
  std::ostringstream oss;
  oss << "block marginalization identity over " << states << " states, max rel err "
      << worst << " (<= 1e-10), " << seconds_since(start) << " s (< 10 s)";
  report(1, worst <= 1e-10 && seconds_since(start) < 10.0, oss.str());
}

// ---------------------------------------------------------------------------
// Criterion 2: chain stationarity against full enumeration on the same tiny
// instance as criterion 1 (R=3, E=2, A=2), theta integrated out analytically.

struct TinyEnum {
  Corpus corpus;
  Empirical phi;
  SimilarityCache cache;
  Hyperparameters hyper;
  static constexpr int R = 3, E = 2, A = 2, V0 = 2, V1 = 3;
  static constexpr long kYStates = 36;  // (V0 * V1)^E
  static constexpr long kLStates = 8;   // E^R
  static constexpr long kZStates = 64;  // 2^(R*A)
  static constexpr long kStates = kYStates * kLStates * kZStates;
  std::vector<double> beta_table;  // collapsed Beta ratio per z-sum 0..R

  TinyEnum() {
    corpus = make_tiny_corpus({{"A", "X"}, {"A", "Y"}, {"B", "Z"}});
    phi = empirical_distributions(corpus);
    cache = SimilarityCache::build(corpus, phi);
    hyper.entities = E;
    hyper.alpha = {1.0, 1.0};
    hyper.beta = {9.0, 9.0};
    const double a = 1.0, b = 9.0;
    for (int z = 0; z <= R; ++z) {
      beta_table.push_back(std::exp(std::lgamma(z + a) + std::lgamma(R - z + b) -
                                    std::lgamma(R + a + b) -
                                    (std::lgamma(a) + std::lgamma(b) -
                                     std::lgamma(a + b))));
    }
  }

  long key(const ModelState& s) const {
    long y = 0;
    for (int e = E - 1; e >= 0; --e) {
      y = y * V1 + s.Y[static_cast<std::size_t>(e * A + 1)];
      y = y * V0 + s.Y[static_cast<std::size_t>(e * A)];
    }
    long l = 0;
    for (int r = R - 1; r >= 0; --r) l = l * E + s.lambda[static_cast<std::size_t>(r)];
    long z = 0;
    for (int i = 0; i < R * A; ++i) z |= static_cast<long>(s.Z[static_cast<std::size_t>(i)]) << i;
    return (y * kLStates + l) * kZStates + z;
  }

  // Unnormalized posterior mass, computed from scratch (phi products, 1/E
  // link prior, hit/miss cell terms with the constant-measure distortion
  // pmf, Beta-Binomial theta collapse). Zero outside the support.
  double mass(const std::vector<int>& y, const std::vector<int>& lambda,
              int zcode) const {
    double m = 1.0;
    for (int e = 0; e < E; ++e) {
      for (int a = 0; a < A; ++a) {
        m *= phi[static_cast<std::size_t>(a)]
                [static_cast<std::size_t>(y[static_cast<std::size_t>(e * A + a)])];
      }
    }
    m /= std::pow(static_cast<double>(E), R);
    for (int a = 0; a < A; ++a) {
      int zsum = 0;
      double prod = 1.0;
      for (int r = 0; r < R; ++r) {
        const int z = (zcode >> (r * A + a)) & 1;
        zsum += z;
        if (!corpus.observed(r, a)) continue;
        const ValueId x = corpus.value(r, a);
        const ValueId yv = static_cast<ValueId>(
            y[static_cast<std::size_t>(lambda[static_cast<std::size_t>(r)] * A + a)]);
        if (z == 0) {
          if (x != yv) return 0.0;
        } else {
          prod *= phi[static_cast<std::size_t>(a)][static_cast<std::size_t>(x)];
        }
      }
      m *= prod * beta_table[static_cast<std::size_t>(zsum)];
    }
    return m;
  }

  template <typename Visit>
  void enumerate(Visit&& visit) const {
    std::vector<int> y(static_cast<std::size_t>(E * A));
    std::vector<int> lambda(static_cast<std::size_t>(R));
    for (long ycode = 0; ycode < kYStates; ++ycode) {
      long yc = ycode;
      for (int e = 0; e < E; ++e) {
        y[static_cast<std::size_t>(e * A)] = static_cast<int>(yc % V0);
        yc /= V0;
        y[static_cast<std::size_t>(e * A + 1)] = static_cast<int>(yc % V1);
        yc /= V1;
      }
      for (long lcode = 0; lcode < kLStates; ++lcode) {
        long lc = lcode;
        for (int r = 0; r < R; ++r) {
          lambda[static_cast<std::size_t>(r)] = static_cast<int>(lc % E);
          lc /= E;
        }
        for (int zcode = 0; zcode < kZStates; ++zcode) {
          visit((ycode * kLStates + lcode) * kZStates + zcode,
                mass(y, lambda, zcode));
        }
      }
    }
  }
};

void criterion_2() {
  const auto start = std::chrono::steady_clock::now();
  TinyEnum tiny;
  BaseTables base = BaseTables::build(tiny.cache, tiny.phi);

  // Cross-check the enumeration oracle against the model's collapsed density
  // (they must differ by a constant) before using it as the gold standard.
  {
    BlockingTree depth0 = fit_tree(tiny.corpus, {0}, 0);
    ModelState probe = init_state(tiny.corpus, tiny.hyper, depth0, tiny.phi, 1);
    std::vector<int> y(probe.Y.begin(), probe.Y.end());
    int zc = 0;
    for (int i = 0; i < TinyEnum::R * TinyEnum::A; ++i) {
      zc |= probe.Z[static_cast<std::size_t>(i)] << i;
    }
    const double own = std::log(tiny.mass(y, probe.lambda, zc));
    const double model =
        log_joint_collapsed(probe, tiny.corpus, tiny.cache, tiny.phi, tiny.hyper,
                            depth0);
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
      for (int e = 0; e < probe.E; ++e) {
        for (int a = 0; a < probe.A; ++a) {
          probe.y(e, a) = static_cast<ValueId>(rng.uniform_index(
              tiny.corpus.dictionaries[static_cast<std::size_t>(a)].size()));
        }
      }
      for (auto& l : probe.lambda) {
        l = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(probe.E)));
      }
      for (int r = 0; r < probe.R; ++r) {
        probe.gamma[static_cast<std::size_t>(r)] = depth0.assign(
            &probe.Y[static_cast<std::size_t>(
                probe.lambda[static_cast<std::size_t>(r)] * probe.A)]);
      }
      int zcode = 0;
      for (int i = 0; i < probe.R * probe.A; ++i) {
        probe.Z[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
        zcode |= probe.Z[static_cast<std::size_t>(i)] << i;
      }
      std::vector<int> yy(probe.Y.begin(), probe.Y.end());
      const double m = tiny.mass(yy, probe.lambda, zcode);
      const double lj = log_joint_collapsed(probe, tiny.corpus, tiny.cache,
                                            tiny.phi, tiny.hyper, depth0);
      const bool zero = m == 0.0;
      if (zero != !std::isfinite(lj) ||
          (!zero && std::abs((std::log(m) - lj) - (own - model)) > 1e-9)) {
        report(2, false, "enumeration oracle disagrees with the collapsed density");
        return;
      }
    }
  }

  double z_total = 0.0;
  tiny.enumerate([&](long, double m) { z_total += m; });

  const long sweeps = 1000000;
  bool all_pass = true;
  std::ostringstream detail;
  for (int depth = 0; depth <= 1; ++depth) {
    BlockingTree tree = fit_tree(tiny.corpus, {0}, depth);
    for (auto sampler : {Sampler::Gibbs, Sampler::Pcg1}) {
      Engine engine(tiny.corpus, tiny.hyper, tree, tiny.cache, tiny.phi, base,
                    sampler, 424242, false);
      std::vector<std::uint32_t> counts(static_cast<std::size_t>(TinyEnum::kStates), 0);
      for (long i = 0; i < sweeps; ++i) {
        engine.step();
        ++counts[static_cast<std::size_t>(tiny.key(engine.state()))];
      }
      double tv = 0.0;
      tiny.enumerate([&](long k, double m) {
        const double p = m / z_total;
        const double f =
            counts[static_cast<std::size_t>(k)] / static_cast<double>(sweeps);
        tv += std::abs(p - f);
      });
      tv /= 2.0;
      detail << " " << to_string(sampler) << "/B=" << (1 << depth) << " tv=" << tv;
      all_pass = all_pass && tv <= 0.02;
    }
  }
  detail << " over 1e6 sweeps (tv <= 0.02 each), " << seconds_since(start)
         << " s (< 600 s/chain)";
  report(2, all_pass, "stationarity vs full enumeration:" + detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 3: kernel draws match direct normalization of their conditionals.

void criterion_3() {
  const int kDraws = 100000;
  double worst_lambda = 0.0, worst_pcg2 = 0.0, worst_entity = 0.0, worst_pert = 0.0;
  Rng meta(777);

  for (int cfg = 0; cfg < 20; ++cfg) {
    InstanceOptions opt;
    opt.records = 8 + static_cast<int>(meta.uniform_index(10));
    opt.entities = opt.records + static_cast<int>(meta.uniform_index(6));
    opt.depth = static_cast<int>(meta.uniform_index(2));
    opt.string_domain = 8 + static_cast<int>(meta.uniform_index(8));
    opt.cat_domain = 3 + static_cast<int>(meta.uniform_index(4));
    Instance inst = make_instance(1000 + static_cast<std::uint64_t>(cfg), opt);
    Rng rng = Rng::keyed(5000, 3, static_cast<std::uint64_t>(cfg));
    randomize_state(inst, rng);
    const KernelContext ctx = inst.ctx();

    // lambda kernels on a random record.
    const int r = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(inst.state.R)));
    const int b = inst.state.gamma[static_cast<std::size_t>(r)];
    const auto& block = inst.block_entities[static_cast<std::size_t>(b)];
    {
      std::vector<double> pmf;
      double total = 0.0;
      for (int e : block) {
        pmf.push_back(testing::oracle_link_weight(inst, r, e));
        total += pmf.back();
      }
      for (auto& w : pmf) w /= total;
      std::map<int, int> counts;
      ModelState scratch = inst.state;
      for (int i = 0; i < kDraws; ++i) {
        scratch.lambda[static_cast<std::size_t>(r)] =
            inst.state.lambda[static_cast<std::size_t>(r)];
        ++counts[update_lambda_gibbs(scratch, ctx, inst.index[static_cast<std::size_t>(b)],
                                     block, r, rng)];
      }
      worst_lambda = std::max(worst_lambda, testing::tv_counts(counts, pmf, kDraws, block));
    }
    {
      std::vector<double> pmf;
      double total = 0.0;
      for (int e : block) {
        pmf.push_back(testing::oracle_link_weight_marginal(inst, r, e));
        total += pmf.back();
      }
      for (auto& w : pmf) w /= total;
      std::map<int, int> counts;
      ModelState scratch = inst.state;
      for (int i = 0; i < kDraws; ++i) {
        ++counts[update_lambda_pcg2(scratch, ctx, block, r, rng)];
      }
      worst_pcg2 = std::max(worst_pcg2, testing::tv_counts(counts, pmf, kDraws, block));
    }

    // entity-attribute conditional (z marginalized, as in the joint update).
    {
      const int e = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(inst.state.E)));
      const int a = static_cast<int>(rng.uniform_index(2));
      const auto& records = inst.entity_records[static_cast<std::size_t>(e)];
      auto pmf = testing::oracle_entity_pmf(inst, a, records);
      std::map<int, int> counts;
      for (int i = 0; i < kDraws; ++i) {
        ++counts[draw_entity_value(inst.state, ctx, e, a, records, false, rng)];
      }
      std::vector<int> ids(pmf.size());
      for (std::size_t v = 0; v < ids.size(); ++v) ids[v] = static_cast<int>(v);
      worst_entity = std::max(worst_entity, testing::tv_counts(counts, pmf, kDraws, ids));
    }

    // perturbation mixture vs brute-force normalization.
    {
      const std::size_t n = 3 + rng.uniform_index(30);
      std::vector<double> q(n);
      double zq = 0.0;
      for (auto& x : q) {
        x = 0.02 + rng.uniform();
        zq += x;
      }
      for (auto& x : q) x /= zq;
      std::vector<std::size_t> support;
      std::vector<double> q_at, eps, target(n);
      for (std::size_t i = 0; i < n; ++i) {
        double e = 0.0;
        if (rng.uniform() < 0.3) {
          e = 4.0 * rng.uniform();
          support.push_back(i);
          q_at.push_back(q[i]);
          eps.push_back(e);
        }
        target[i] = q[i] * (1.0 + e);
      }
      double zp = 0.0;
      for (double x : target) zp += x;
      for (auto& x : target) x /= zp;
      AliasTable base_table(q);
      PerturbationContext pctx{&base_table, support, q_at, eps};
      std::vector<int> counts(n, 0);
      for (int i = 0; i < kDraws; ++i) ++counts[perturbation_draw(pctx, rng)];
      double tv = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        tv += std::abs(counts[i] / static_cast<double>(kDraws) - target[i]);
      }
      worst_pert = std::max(worst_pert, tv / 2.0);
    }
  }

  std::ostringstream oss;
  oss << "kernel oracles over 20 configs x 1e5 draws: max tv lambda=" << worst_lambda
      << " pcg2=" << worst_pcg2 << " entity=" << worst_entity
      << " perturbation=" << worst_pert << " (each <= 0.01)";
  report(3, worst_lambda <= 0.01 && worst_pcg2 <= 0.01 && worst_entity <= 0.01 &&
                worst_pert <= 0.01,
         oss.str());
}

// ---------------------------------------------------------------------------
// Criterion 4: index-pruned candidate set equals the naive positive-weight
// support exactly.

void criterion_4() {
  Rng meta(888);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    InstanceOptions opt;
    opt.records = 10 + static_cast<int>(meta.uniform_index(30));
    opt.entities = opt.records + static_cast<int>(meta.uniform_index(10));
    opt.depth = static_cast<int>(meta.uniform_index(2));
    Instance inst = make_instance(2000 + static_cast<std::uint64_t>(trial), opt);
    Rng rng = Rng::keyed(6000, 4, static_cast<std::uint64_t>(trial));
    randomize_state(inst, rng);
    const KernelContext ctx = inst.ctx();
    for (int r = 0; r < inst.state.R; ++r) {
      const int b = inst.state.gamma[static_cast<std::size_t>(r)];
      const auto& block = inst.block_entities[static_cast<std::size_t>(b)];
      auto candidates = candidate_links(inst.state, ctx,
                                        inst.index[static_cast<std::size_t>(b)], block, r);
      std::vector<int> support;
      for (int e : block) {
        if (testing::oracle_link_weight(inst, r, e) > 0.0) support.push_back(e);
      }
      // Pruned-out entities must be exactly the zero-weight ones; the
      // candidate set may keep zero-weight entities only when no attribute
      // could prune (full block), which the oracle equality below rejects
      // anyway unless the sets truly coincide.
      std::vector<int> pruned_support;
      for (int e : candidates) {
        if (testing::oracle_link_weight(inst, r, e) > 0.0) pruned_support.push_back(e);
      }
      if (pruned_support != support) {
        report(4, false, "candidate set misses positive-weight entities");
        return;
      }
      bool has_undistorted = false;
      for (int a = 0; a < inst.state.A; ++a) {
        if (inst.corpus.observed(r, a) && inst.state.z(r, a) == 0) has_undistorted = true;
      }
      if (has_undistorted && candidates != support) {
        report(4, false, "pruned candidate set differs from the naive support");
        return;
      }
      ++checked;
    }
  }
  std::ostringstream oss;
  oss << "pruning exactness on 100 fuzzed states (" << checked << " record updates)";
  report(4, true, oss.str());
}

// ---------------------------------------------------------------------------
// Criteria 5-7 share the synthetic benchmark pipeline.

struct BenchResult {
  Metrics metrics;
  double seconds = 0.0;
};

GeneratorConfig bench_generator(double theta) {
  GeneratorConfig g;
  g.attributes = {
      {"fname", AttributeKind::String, 300, 0.8, 10.0, 7.0, {}, {}},
      {"lname", AttributeKind::String, 300, 0.8, 10.0, 7.0, {}, {}},
      {"by", AttributeKind::Categorical, 60, 0.0, 10.0, 0.0, {}, {}},
      {"bm", AttributeKind::Categorical, 12, 0.0, 10.0, 0.0, {}, {}},
      {"bd", AttributeKind::Categorical, 28, 0.0, 10.0, 0.0, {}, {}}};
  g.table_sizes = {10000};
  g.theta = {theta};
  g.eta = {1.0};
  g.mode = LinkMode::Duplication;
  g.duplicate_rate = 0.1;
  return g;
}

BenchResult run_benchmark(const Corpus& corpus, double alpha, double beta,
                          long iterations, long burnin, int thin) {
  const auto start = std::chrono::steady_clock::now();
  Empirical phi = empirical_distributions(corpus);
  SimilarityCache cache = SimilarityCache::build(corpus, phi);
  Hyperparameters hyper;
  hyper.entities = corpus.records();
  hyper.alpha.assign(static_cast<std::size_t>(corpus.attributes()), alpha);
  hyper.beta.assign(static_cast<std::size_t>(corpus.attributes()), beta);
  BlockingTree tree = fit_tree(corpus, {0, 1}, 3);
  BaseTables base = BaseTables::build(cache, phi);
  Engine engine(corpus, hyper, tree, cache, phi, base, Sampler::Pcg1, 42, true);

  std::vector<std::vector<int>> snapshots;
  for (long k = 1; k <= iterations; ++k) {
    engine.step();
    if (k > burnin && k % thin == 0) snapshots.push_back(engine.state().lambda);
  }
  Clustering clusters = smpmms(snapshots);
  BenchResult result;
  result.metrics = evaluate(clusters, *corpus.ground_truth);
  result.seconds = seconds_since(start);
  return result;
}

void criteria_5_6_7() {
  const long iters = 10000, burnin = 2000;
  const int thin = 10;

  Corpus clean = generate_synthetic(bench_generator(0.0), 20260823);
  Corpus noisy = generate_synthetic(bench_generator(0.05), 20260823);

  BenchResult clean_run = run_benchmark(clean, 10.0, 1000.0, iters, burnin, thin);
  BenchResult noisy_run = run_benchmark(noisy, 10.0, 1000.0, iters, burnin, thin);
  {
    std::ostringstream oss;
    oss << "synthetic benchmark (1e4 records, 1e4 iterations): zero-noise F1="
        << clean_run.metrics.f1 << " (>= 0.90, " << clean_run.seconds
        << " s), realistic noise F1=" << noisy_run.metrics.f1 << " (>= 0.60, "
        << noisy_run.seconds << " s); noisy precision=" << noisy_run.metrics.precision
        << " recall=" << noisy_run.metrics.recall;
    report(5, clean_run.metrics.f1 >= 0.90 && noisy_run.metrics.f1 >= 0.60, oss.str());
  }

  // Criterion 6: record-level block balance at depth 3 on the same corpus,
  // with the full three-attribute blocking cycle.
  {
    BlockingTree tree = fit_tree(clean, {0, 1, 2}, 3);
    std::vector<int> sizes(static_cast<std::size_t>(tree.blocks()), 0);
    std::vector<ValueId> row(static_cast<std::size_t>(clean.attributes()));
    for (int r = 0; r < clean.records(); ++r) {
      for (int a = 0; a < clean.attributes(); ++a) {
        row[static_cast<std::size_t>(a)] = clean.value(r, a);
      }
      ++sizes[static_cast<std::size_t>(tree.assign(row))];
    }
    const auto devs = balance_report(sizes);
    const double worst = *std::max_element(devs.begin(), devs.end());
    std::ostringstream oss;
    oss << "depth-3 block balance on 1e4 records: max relative deviation " << worst
        << " (<= 0.10)";
    report(6, worst <= 0.10, oss.str());
  }

  BenchResult strong = run_benchmark(noisy, 100.0, 10000.0, iters, burnin, thin);
  {
    std::ostringstream oss;
    oss << "stronger Beta prior (alpha 10->100, beta 1000->10000): precision "
        << noisy_run.metrics.precision << " -> " << strong.metrics.precision
        << ", F1 " << noisy_run.metrics.f1 << " -> " << strong.metrics.f1
        << " (both strictly increase)";
    report(7,
           strong.metrics.precision > noisy_run.metrics.precision &&
               strong.metrics.f1 > noisy_run.metrics.f1,
           oss.str());
  }
}

// ---------------------------------------------------------------------------
// Criterion 8: performance properties.

void criterion_8() {
  // (a) multi-worker throughput; requires >= 8 hardware threads.
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw < 8) {
    std::ostringstream oss;
    oss << "8a parallel speedup needs >= 8 hardware threads, found " << hw
        << "; property not evaluable on this machine";
    report_skip(8, oss.str());
  } else {
    GeneratorConfig g = bench_generator(0.02);
    g.table_sizes = {100000};
    Corpus corpus = generate_synthetic(g, 7);
    Empirical phi = empirical_distributions(corpus);
    SimilarityCache cache = SimilarityCache::build(corpus, phi);
    Hyperparameters hyper = default_hyperparameters(corpus);
    BaseTables base = BaseTables::build(cache, phi);
    auto rate = [&](int depth) {
      BlockingTree tree = fit_tree(corpus, {0, 1}, depth);
      Engine engine(corpus, hyper, tree, cache, phi, base, Sampler::Pcg1, 11,
                    depth > 0);
      engine.step();  // warm-up
      const auto start = std::chrono::steady_clock::now();
      const int n = 10;
      for (int i = 0; i < n; ++i) engine.step();
      return n / seconds_since(start);
    };
    const double r1 = rate(0), r8 = rate(3);
    std::ostringstream oss;
    oss << "8a B=8 throughput " << r8 << " it/s vs B=1 " << r1 << " it/s (ratio "
        << r8 / r1 << " >= 3)";
    report(8, r8 >= 3.0 * r1, oss.str());
  }

  // (b) indexed lambda update vs naive full-block scan at |P_b| = 1e4.
  {
    GeneratorConfig g = bench_generator(0.0);
    Corpus corpus = generate_synthetic(g, 9);
    Empirical phi = empirical_distributions(corpus);
    SimilarityCache cache = SimilarityCache::build(corpus, phi);
    Hyperparameters hyper = default_hyperparameters(corpus);
    BlockingTree tree = fit_tree(corpus, {0, 1}, 0);  // single 1e4-entity block
    ModelState state = init_state(corpus, hyper, tree, phi, 3);
    KernelContext ctx{&corpus, &cache, &phi, &hyper, &tree, nullptr};
    std::vector<int> block(static_cast<std::size_t>(state.E));
    for (int e = 0; e < state.E; ++e) block[static_cast<std::size_t>(e)] = e;
    // <= 2% distortion: flip z on a random 1% of cells (keeping validity is
    // irrelevant for the timing comparison; both kernels see the same state).
    Rng rng(13);
    long distorted = 0;
    for (auto& z : state.Z) {
      if (rng.uniform() < 0.01) {
        z = 1;
        ++distorted;
      }
    }
    InvertedIndex index(state.A);
    index.rebuild(state, block);
    const int updates = 3000;
    ModelState s1 = state, s2 = state;
    const auto t1 = std::chrono::steady_clock::now();
    for (int i = 0; i < updates; ++i) {
      update_lambda_gibbs(s1, ctx, index, block, i % state.R, rng);
    }
    const double indexed = seconds_since(t1);
    const auto t2 = std::chrono::steady_clock::now();
    for (int i = 0; i < updates; ++i) {
      update_lambda_naive(s2, ctx, block, i % state.R, rng);
    }
    const double naive = seconds_since(t2);
    std::ostringstream oss;
    oss << "8b indexed lambda update " << updates / indexed << " upd/s vs naive "
        << updates / naive << " upd/s at |P_b|=1e4, "
        << 100.0 * static_cast<double>(distorted) /
               static_cast<double>(state.Z.size())
        << "% distortion (ratio " << naive / indexed << " >= 5)";
    report(8, naive >= 5.0 * indexed, oss.str());
  }

  // (c) PCG-II per-iteration wall time exceeds PCG-I's.
  {
    Corpus corpus = generate_synthetic(bench_generator(0.02), 15);
    Empirical phi = empirical_distributions(corpus);
    SimilarityCache cache = SimilarityCache::build(corpus, phi);
    Hyperparameters hyper = default_hyperparameters(corpus);
    BlockingTree tree = fit_tree(corpus, {0, 1}, 3);
    BaseTables base = BaseTables::build(cache, phi);
    auto time_variant = [&](Sampler sampler) {
      Engine engine(corpus, hyper, tree, cache, phi, base, sampler, 21, false);
      engine.step();
      const auto start = std::chrono::steady_clock::now();
      for (int i = 0; i < 10; ++i) engine.step();
      return seconds_since(start) / 10.0;
    };
    const double pcg1 = time_variant(Sampler::Pcg1);
    const double pcg2 = time_variant(Sampler::Pcg2);
    std::ostringstream oss;
    oss << "8c per-iteration wall time pcg2=" << pcg2 << " s > pcg1=" << pcg1 << " s";
    report(8, pcg2 > pcg1, oss.str());
  }
}

// ---------------------------------------------------------------------------
// Criterion 9: byte-identical traces across repeated runs and across
// sequential/threaded execution.

void criterion_9() {
  namespace fs = std::filesystem;
  Corpus corpus = generate_synthetic(
      [] {
        GeneratorConfig g = bench_generator(0.03);
        g.table_sizes = {2000};
        return g;
      }(),
      31);
  Empirical phi = empirical_distributions(corpus);
  SimilarityCache cache = SimilarityCache::build(corpus, phi);
  Hyperparameters hyper = default_hyperparameters(corpus);
  BlockingTree tree = fit_tree(corpus, {0, 1}, 2);
  BaseTables base = BaseTables::build(cache, phi);

  auto trace_of = [&](bool parallel, const std::string& name) {
    Engine engine(corpus, hyper, tree, cache, phi, base, Sampler::Pcg1, 55, parallel);
    const fs::path dir = fs::temp_directory_path() / ("entlink_accept_" + name);
    fs::remove_all(dir);
    RunOptions options;
    options.iterations = 50;
    options.thin = 5;
    options.out_dir = dir.string();
    run_engine(engine, options);
    std::ifstream in(dir / "trace.csv", std::ios::binary);
    std::ostringstream oss;
    oss << in.rdbuf();
    fs::remove_all(dir);
    return oss.str();
  };

  const std::string a = trace_of(true, "a");
  const std::string b = trace_of(true, "b");
  const std::string c = trace_of(false, "c");
  const bool pass = !a.empty() && a == b && a == c;
  report(9, pass,
         "identical (seed, config) traces byte-identical across reruns and across "
         "threaded vs sequential execution");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criteria_5_6_7();
  criterion_8();
  criterion_9();
  std::cout << (g_failures == 0 ? "ALL CRITERIA SATISFIED"
                                : "FAILURES: " + std::to_string(g_failures))
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
