#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "entlink/model.hpp"

using namespace entlink;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One-table, one-attribute corpus over the domain {"A", "B"}.
struct Tiny {
  Corpus corpus;
  Empirical phi;
  SimilarityCache cache;
  Hyperparameters hyper;
  BlockingTree tree;  // depth 1, left iff value == "A"

  explicit Tiny(std::vector<std::string> xs, double alpha = 1.5, double beta = 4.0,
                int entities = 2) {
    corpus.schema = {{"v", AttributeKind::Categorical, 10.0, 0.0}};
    corpus.dictionaries.resize(1);
    corpus.dict_index.resize(1);
    corpus.encode(0, "A");
    corpus.encode(0, "B");
    corpus.table_sizes = {static_cast<int>(xs.size())};
    for (const auto& x : xs) {
      corpus.rec_table.push_back(0);
      corpus.values.push_back(x.empty() ? kMissing : corpus.dict_index[0].at(x));
    }
    phi = {{0.6, 0.4}};
    cache = SimilarityCache::build(corpus.dictionaries, phi,
                                   {SimilaritySpec{true, 10.0, 0.0}});
    hyper.entities = entities;
    hyper.alpha = {alpha};
    hyper.beta = {beta};

    BlockingTree::Node node;
    node.attr = 0;
    node.rule = SplitRule::ReferenceSet;
    node.reference = {"A"};
    tree = BlockingTree(1, {node});
    tree.bind(corpus.dictionaries);
  }

  ModelState make_state(std::vector<ValueId> Y, std::vector<int> lambda,
                        std::vector<std::uint8_t> Z, double theta) const {
    ModelState s;
    s.E = hyper.entities;
    s.A = 1;
    s.R = corpus.records();
    s.T = 1;
    s.Y = std::move(Y);
    s.lambda = std::move(lambda);
    s.gamma.resize(s.lambda.size());
    for (std::size_t r = 0; r < s.lambda.size(); ++r) {
      s.gamma[r] = tree.assign(&s.Y[static_cast<std::size_t>(s.lambda[r])]);
    }
    s.Z = std::move(Z);
    s.theta = {theta};
    return s;
  }
};

}  // namespace

TEST_CASE("default hyperparameters") {
  GeneratorConfig cfg;
  cfg.attributes = {{"c", AttributeKind::Categorical, 3, 0.0, 10.0, 0.0, {}, {}}};
  cfg.table_sizes = {200};
  cfg.entities = 100;
  auto corpus = generate_synthetic(cfg, 1);
  auto hyper = default_hyperparameters(corpus);
  CHECK(hyper.entities == 200);
  CHECK(hyper.alpha[0] == doctest::Approx(0.2));
  CHECK(hyper.beta[0] == doctest::Approx(20.0));
  double mean = hyper.alpha[0] / (hyper.alpha[0] + hyper.beta[0]);
  CHECK(mean == doctest::Approx(0.0099).epsilon(0.01));
}

TEST_CASE("init state copies records and passes the validator") {
  GeneratorConfig cfg;
  cfg.attributes = {{"fn", AttributeKind::String, 25, 0.5, 10.0, 7.0, {}, {}},
                    {"cat", AttributeKind::Categorical, 6, 1.0, 10.0, 0.0, {}, {}}};
  cfg.table_sizes = {30, 20};
  cfg.entities = 25;
  cfg.theta = {0.2};
  cfg.eta = {0.8};
  auto corpus = generate_synthetic(cfg, 2);
  auto phi = empirical_distributions(corpus);
  auto hyper = default_hyperparameters(corpus);
  hyper.entities = corpus.records() + 10;
  auto tree = fit_tree(corpus, {0, 1}, 2);

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto state = init_state(corpus, hyper, tree, phi, seed);
    validate_state(state, corpus, tree);
    for (int r = 0; r < corpus.records(); ++r) {
      CHECK(state.lambda[static_cast<std::size_t>(r)] == r);
      for (int a = 0; a < 2; ++a) {
        if (corpus.observed(r, a)) {
          CHECK(state.y(r, a) == corpus.value(r, a));
          CHECK(state.z(r, a) == 0);
        }
      }
    }
    for (int t = 0; t < state.T; ++t) {
      CHECK(state.th(t, 0) == doctest::Approx(hyper.alpha[0] /
                                              (hyper.alpha[0] + hyper.beta[0])));
    }
  }

  // Fewer entities than records: seeding wraps around but stays valid.
  hyper.entities = corpus.records() - 1;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto state = init_state(corpus, hyper, tree, phi, seed);
    validate_state(state, corpus, tree);
    for (int r = 0; r < corpus.records(); ++r) {
      CHECK(state.lambda[static_cast<std::size_t>(r)] == r % state.E);
    }
  }
}

TEST_CASE("log joint matches a hand-expanded oracle on the tiny instance") {
  Tiny tiny({"A", "B"});
  const double alpha = tiny.hyper.alpha[0];
  const double beta = tiny.hyper.beta[0];
  const std::vector<double> phi{0.6, 0.4};

  // Independent expansion of the posterior factors (constant measure:
  // psi(v|w) = phi(v)).
  auto oracle = [&](const ModelState& s) {
    double lp = 0.0;
    for (int e = 0; e < 2; ++e) lp += std::log(phi[static_cast<std::size_t>(s.y(e, 0))]);
    double th = s.theta[0];
    lp += (alpha - 1.0) * std::log(th) + (beta - 1.0) * std::log(1.0 - th);
    lp -= 2.0 * std::log(2.0);
    for (int r = 0; r < 2; ++r) {
      int e = s.lambda[static_cast<std::size_t>(r)];
      // Support: gamma must match the entity's block (left iff y == "A").
      int block = s.y(e, 0) == 0 ? 0 : 1;
      if (s.gamma[static_cast<std::size_t>(r)] != block) return -kInf;
      lp += s.z(r, 0) ? std::log(th) : std::log(1.0 - th);
      ValueId x = tiny.corpus.value(r, 0);
      if (s.z(r, 0) == 0) {
        if (x != s.y(e, 0)) return -kInf;
      } else {
        lp += std::log(phi[static_cast<std::size_t>(x)]);
      }
    }
    return lp;
  };

  int finite = 0;
  for (ValueId y0 = 0; y0 < 2; ++y0)
    for (ValueId y1 = 0; y1 < 2; ++y1)
      for (int l0 = 0; l0 < 2; ++l0)
        for (int l1 = 0; l1 < 2; ++l1)
          for (int z0 = 0; z0 < 2; ++z0)
            for (int z1 = 0; z1 < 2; ++z1)
              for (double th : {0.2, 0.5, 0.8}) {
                auto s = tiny.make_state({y0, y1}, {l0, l1},
                                         {static_cast<std::uint8_t>(z0),
                                          static_cast<std::uint8_t>(z1)},
                                         th);
                double got = log_joint(s, tiny.corpus, tiny.cache, tiny.phi,
                                       tiny.hyper, tiny.tree);
                double expect = oracle(s);
                if (std::isinf(expect)) {
                  CHECK(std::isinf(got));
                } else {
                  ++finite;
                  CHECK(got == doctest::Approx(expect).epsilon(1e-12));
                }
              }
  CHECK(finite > 0);
}

TEST_CASE("support violations give minus infinity") {
  Tiny tiny({"A", "B"});
  // z = 0 but x != y for record 1.
  auto s = tiny.make_state({0, 0}, {0, 1}, {0, 0}, 0.3);
  CHECK(log_joint(s, tiny.corpus, tiny.cache, tiny.phi, tiny.hyper, tiny.tree) ==
        -kInf);
  // Force an inconsistent gamma.
  auto s2 = tiny.make_state({0, 1}, {0, 1}, {0, 0}, 0.3);
  REQUIRE(std::isfinite(
      log_joint(s2, tiny.corpus, tiny.cache, tiny.phi, tiny.hyper, tiny.tree)));
  s2.gamma[0] = 1 - s2.gamma[0];
  CHECK(log_joint(s2, tiny.corpus, tiny.cache, tiny.phi, tiny.hyper, tiny.tree) ==
        -kInf);
}

TEST_CASE("single block reduces to the unblocked density") {
  Tiny tiny({"A", "B"});
  BlockingTree flat(0, {});
  flat.bind(tiny.corpus.dictionaries);
  for (ValueId y0 = 0; y0 < 2; ++y0)
    for (ValueId y1 = 0; y1 < 2; ++y1)
      for (int l0 = 0; l0 < 2; ++l0)
        for (int l1 = 0; l1 < 2; ++l1)
          for (int z0 = 0; z0 < 2; ++z0)
            for (int z1 = 0; z1 < 2; ++z1) {
              ModelState s = tiny.make_state({y0, y1}, {l0, l1},
                                             {static_cast<std::uint8_t>(z0),
                                              static_cast<std::uint8_t>(z1)},
                                             0.4);
              s.gamma = {0, 0};
              double blocked =
                  log_joint(s, tiny.corpus, tiny.cache, tiny.phi, tiny.hyper, flat);
              double flat_lp =
                  blink_log_joint(s, tiny.corpus, tiny.cache, tiny.phi, tiny.hyper);
              if (std::isinf(blocked)) {
                CHECK(std::isinf(flat_lp));
              } else {
                CHECK(blocked == doctest::Approx(flat_lp).epsilon(1e-12));
              }
            }
}

TEST_CASE("block marginalization matches the unblocked density") {
  // Sum exp(log_joint) over all Gamma assignments; compare against
  // exp(blink_log_joint) state by state. The ratio must be one global
  // constant across every finite state.
  Tiny tiny({"A", "B", "A"}, 1.5, 4.0, /*entities=*/2);
  double ratio = 0.0;
  bool have_ratio = false;
  for (ValueId y0 = 0; y0 < 2; ++y0)
    for (ValueId y1 = 0; y1 < 2; ++y1)
      for (int l0 = 0; l0 < 2; ++l0)
        for (int l1 = 0; l1 < 2; ++l1)
          for (int l2 = 0; l2 < 2; ++l2)
            for (int zbits = 0; zbits < 8; ++zbits)
              for (double th : {0.25, 0.6}) {
                ModelState s = tiny.make_state(
                    {y0, y1}, {l0, l1, l2},
                    {static_cast<std::uint8_t>(zbits & 1),
                     static_cast<std::uint8_t>((zbits >> 1) & 1),
                     static_cast<std::uint8_t>((zbits >> 2) & 1)},
                    th);
                double sum = 0.0;
                for (int g0 = 0; g0 < 2; ++g0)
                  for (int g1 = 0; g1 < 2; ++g1)
                    for (int g2 = 0; g2 < 2; ++g2) {
                      s.gamma = {g0, g1, g2};
                      double lp = log_joint(s, tiny.corpus, tiny.cache, tiny.phi,
                                            tiny.hyper, tiny.tree);
                      if (std::isfinite(lp)) sum += std::exp(lp);
                    }
                double flat_lp = blink_log_joint(s, tiny.corpus, tiny.cache,
                                                 tiny.phi, tiny.hyper);
                if (!std::isfinite(flat_lp)) {
                  CHECK(sum == 0.0);
                  continue;
                }
                double r = sum / std::exp(flat_lp);
                if (!have_ratio) {
                  ratio = r;
                  have_ratio = true;
                } else {
                  CHECK(std::abs(r - ratio) <= 1e-10 * std::abs(ratio));
                }
              }
  CHECK(have_ratio);
}

TEST_CASE("collapsed density integrates theta analytically") {
  Tiny tiny({"A", "B"});
  // Numerical quadrature over theta must be proportional to the collapsed
  // density with one shared constant.
  auto integrate = [&](ModelState s) {
    const int n = 20000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double th = (i + 0.5) / n;
      s.theta = {th};
      double lp = log_joint(s, tiny.corpus, tiny.cache, tiny.phi, tiny.hyper,
                            tiny.tree);
      if (std::isfinite(lp)) sum += std::exp(lp);
    }
    return sum / n;
  };

  std::vector<ModelState> states{
      tiny.make_state({0, 1}, {0, 1}, {0, 0}, 0.5),
      tiny.make_state({0, 0}, {0, 1}, {0, 1}, 0.5),
      tiny.make_state({1, 1}, {0, 0}, {1, 0}, 0.5),
  };
  double ratio = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    double collapsed = std::exp(log_joint_collapsed(
        states[i], tiny.corpus, tiny.cache, tiny.phi, tiny.hyper, tiny.tree));
    double numeric = integrate(states[i]);
    REQUIRE(collapsed > 0.0);
    double r = numeric / collapsed;
    if (i == 0) {
      ratio = r;
    } else {
      CHECK(r == doctest::Approx(ratio).epsilon(1e-4));
    }
  }
}
