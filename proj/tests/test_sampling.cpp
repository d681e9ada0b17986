#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "entlink/alias.hpp"
#include "entlink/rng.hpp"

using namespace entlink;

TEST_CASE("rng determinism and keyed streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng s1 = Rng::keyed(1, 2, 3);
  Rng s2 = Rng::keyed(1, 2, 4);
  Rng s3 = Rng::keyed(1, 2, 3);
  CHECK(s1 == s3);
  bool differ = false;
  for (int i = 0; i < 8; ++i) differ = differ || (s1.next_u64() != s2.next_u64());
  CHECK(differ);
}

TEST_CASE("rng serialization round-trip") {
  Rng a(99);
  for (int i = 0; i < 37; ++i) a.uniform();
  std::stringstream buf;
  a.save(buf);
  Rng b(0);
  b.load(buf);
  CHECK(a == b);
  for (int i = 0; i < 50; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform and bernoulli ranges") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    double v = rng.uniform_pos();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(rng.uniform_index(7) < 7);
  }
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += rng.bernoulli(0.3);
  CHECK(hits / 100000.0 == doctest::Approx(0.3).epsilon(0.03));
}

TEST_CASE("gamma and beta moments") {
  Rng rng(17);
  const int n = 100000;
  double gsum = 0.0;
  for (int i = 0; i < n; ++i) gsum += rng.gamma(3.0);
  CHECK(gsum / n == doctest::Approx(3.0).epsilon(0.02));

  double gsum_small = 0.0;
  for (int i = 0; i < n; ++i) gsum_small += rng.gamma(0.5);
  CHECK(gsum_small / n == doctest::Approx(0.5).epsilon(0.03));

  double bsum = 0.0;
  for (int i = 0; i < n; ++i) bsum += rng.beta(2.0, 3.0);
  CHECK(bsum / n == doctest::Approx(0.4).epsilon(0.02));
}

TEST_CASE("alias table degenerate and invalid inputs") {
  std::vector<double> one{1.0};
  AliasTable t(one);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) CHECK(t.draw(rng) == 0);

  std::vector<double> zeros{0.0, 0.0};
  CHECK_THROWS_AS(AliasTable{zeros}, std::invalid_argument);
  std::vector<double> neg{1.0, -0.5};
  CHECK_THROWS_AS(AliasTable{neg}, std::invalid_argument);
  std::vector<double> empty;
  CHECK_THROWS_AS(AliasTable{empty}, std::invalid_argument);
}

TEST_CASE("alias table matches normalized weights") {
  std::vector<double> w{1.0, 3.0};
  AliasTable t(w);
  Rng rng(101);
  int c0 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) c0 += t.draw(rng) == 0;
  CHECK(c0 / static_cast<double>(n) == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("alias table uniform chi-square") {
  std::vector<double> w{2.0, 2.0, 2.0};
  AliasTable t(w);
  Rng rng(202);
  const int n = 100000;
  std::vector<int> counts(3, 0);
  for (int i = 0; i < n; ++i) ++counts[t.draw(rng)];
  double stat = 0.0;
  for (int c : counts) {
    double expect = n / 3.0;
    stat += (c - expect) * (c - expect) / expect;
  }
  // p > 0.001 for chi-square with 2 dof means stat < 13.8155.
  CHECK(stat < 13.8155);
}

TEST_CASE("alias table on random weight vectors") {
  Rng seed_rng(303);
  for (int trial = 0; trial < 5; ++trial) {
    std::size_t n = 2 + seed_rng.uniform_index(49);
    std::vector<double> w(n);
    for (auto& x : w) x = seed_rng.uniform() < 0.2 ? 0.0 : seed_rng.uniform() + 0.01;
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (total <= 0.0) w[0] = total = 1.0;

    AliasTable t(w);
    Rng rng(400 + static_cast<std::uint64_t>(trial));
    const int draws = 200000;
    std::vector<int> counts(n, 0);
    for (int i = 0; i < draws; ++i) ++counts[t.draw(rng)];
    double tv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      tv += std::abs(counts[i] / static_cast<double>(draws) - w[i] / total);
    }
    CHECK(tv / 2.0 < 0.01);
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] == 0.0) CHECK(counts[i] == 0);
    }
  }
}
