#include <doctest.h>

#include <cmath>
#include <vector>

#include "entlink/diagnostics.hpp"
#include "fixtures.hpp"

using namespace entlink;

TEST_CASE("summarize counts singleton and collapsed configurations") {
  auto inst = testing::make_instance(11, {.records = 10, .entities = 10});
  ModelState& s = inst.state;

  SUBCASE("every record its own entity") {
    for (int r = 0; r < s.R; ++r) s.lambda[static_cast<std::size_t>(r)] = r;
    SummaryRow row = summarize(s, inst.corpus);
    CHECK(row.observed_entities == s.R);
    CHECK(row.cluster_size_dist[1] == s.R);
    CHECK(row.cluster_size_dist[0] == s.E - s.R);
  }

  SUBCASE("all records on one entity spill into the overflow bucket") {
    for (int r = 0; r < s.R; ++r) s.lambda[static_cast<std::size_t>(r)] = 0;
    SummaryRow row = summarize(s, inst.corpus, 4);
    CHECK(row.observed_entities == 1);
    CHECK(row.cluster_size_dist.back() == 1);
    CHECK(row.overflow_records == s.R);
  }

  SUBCASE("zero distortion vector when Z is clear") {
    for (auto& z : s.Z) z = 0;
    SummaryRow row = summarize(s, inst.corpus);
    for (long d : row.agg_distortion) CHECK(d == 0);
  }

  SUBCASE("distortion counts observed cells only") {
    for (auto& z : s.Z) z = 1;
    SummaryRow row = summarize(s, inst.corpus);
    for (int a = 0; a < s.A; ++a) {
      long observed = 0;
      for (int r = 0; r < s.R; ++r) observed += inst.corpus.observed(r, a) ? 1 : 0;
      CHECK(row.agg_distortion[static_cast<std::size_t>(a)] == observed);
    }
  }
}

TEST_CASE("summary row invariants hold on random states") {
  auto inst = testing::make_instance(12, {.records = 30, .entities = 20});
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    testing::randomize_state(inst, rng);
    SummaryRow row = summarize(inst.state, inst.corpus, 3);
    row.validate(inst.state.R, inst.state.E);  // throws on violation
  }
}

TEST_CASE("summary row validator rejects corrupted rows") {
  auto inst = testing::make_instance(13, {.records = 10, .entities = 10});
  SummaryRow row = summarize(inst.state, inst.corpus);
  ++row.cluster_size_dist[1];
  CHECK_THROWS_AS(row.validate(inst.state.R, inst.state.E), RuntimeAbort);
}

TEST_CASE("ess on white noise is close to the sample size") {
  Rng rng(21);
  const int n = 10000;
  std::vector<double> series(n);
  for (auto& x : series) x = rng.normal();
  EssResult r = ess(series);
  CHECK_FALSE(r.degenerate);
  CHECK(r.ess > 0.8 * n);
  CHECK(r.ess <= 1.2 * n);
}

TEST_CASE("ess on an AR(1) chain matches the analytic autocorrelation time") {
  Rng rng(22);
  const int n = 10000;
  const double rho = 0.9;
  std::vector<double> series(n);
  double x = 0.0;
  // Warm up into stationarity before recording.
  for (int i = 0; i < 1000; ++i) x = rho * x + rng.normal();
  for (auto& v : series) {
    x = rho * x + rng.normal();
    v = x;
  }
  const double expected = n * (1.0 - rho) / (1.0 + rho);
  EssResult r = ess(series);
  CHECK(r.ess > expected / 1.5);
  CHECK(r.ess < expected * 1.5);
}

TEST_CASE("ess degenerate and edge behavior") {
  std::vector<double> constant(100, 3.5);
  EssResult r = ess(constant);
  CHECK(r.degenerate);
  CHECK(r.ess == 100.0);
  CHECK_THROWS_AS(ess(std::vector<double>(5, 1.0)), std::invalid_argument);
}

TEST_CASE("thinning an autocorrelated series scales ess per point") {
  Rng rng(23);
  const int n = 100000;
  const double rho = 0.8;
  std::vector<double> series(n);
  double x = 0.0;
  for (int i = 0; i < 1000; ++i) x = rho * x + rng.normal();
  for (auto& v : series) {
    x = rho * x + rng.normal();
    v = x;
  }
  // Thinning by 10 makes points nearly independent (rho^10 ~ 0.107), so the
  // per-point efficiency should rise from (1-rho)/(1+rho) ~ 0.111 toward 1.
  std::vector<double> thinned;
  for (int i = 0; i < n; i += 10) thinned.push_back(series[static_cast<std::size_t>(i)]);
  double full_eff = ess(series).ess / n;
  double thin_eff = ess(thinned).ess / static_cast<double>(thinned.size());
  CHECK(thin_eff > 4.0 * full_eff);
  CHECK(thin_eff > 0.6);
}

TEST_CASE("ess_rate divides by wall time") {
  Rng rng(24);
  std::vector<double> series(1000);
  for (auto& v : series) v = rng.normal();
  double e = ess(series).ess;
  CHECK(ess_rate(series, 50.0) == doctest::Approx(e / 50.0));
  CHECK(ess_rate(series, 100.0) == doctest::Approx(0.5 * ess_rate(series, 50.0)));
  CHECK_THROWS_AS(ess_rate(series, 0.0), std::invalid_argument);
}

TEST_CASE("autocorrelation of white noise and AR(1)") {
  Rng rng(25);
  const int n = 50000;
  std::vector<double> noise(n);
  for (auto& v : noise) v = rng.normal();
  auto acf = autocorrelation(noise, 5);
  CHECK(acf[0] == doctest::Approx(1.0));
  for (int lag = 1; lag <= 5; ++lag) {
    CHECK(std::abs(acf[static_cast<std::size_t>(lag)]) < 0.03);
  }

  const double rho = 0.7;
  std::vector<double> ar(n);
  double x = 0.0;
  for (int i = 0; i < 1000; ++i) x = rho * x + rng.normal();
  for (auto& v : ar) {
    x = rho * x + rng.normal();
    v = x;
  }
  auto acf2 = autocorrelation(ar, 3);
  for (int lag = 1; lag <= 3; ++lag) {
    CHECK(acf2[static_cast<std::size_t>(lag)] ==
          doctest::Approx(std::pow(rho, lag)).epsilon(0.08));
  }
}
