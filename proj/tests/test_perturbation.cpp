#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "entlink/perturbation.hpp"

using namespace entlink;

namespace {

double tv_distance(const std::vector<int>& counts, const std::vector<double>& pmf,
                   int draws) {
  double tv = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    tv += std::abs(counts[i] / static_cast<double>(draws) - pmf[i]);
  }
  return tv / 2.0;
}

}  // namespace

TEST_CASE("mixture algebra on the worked example") {
  // X = {A,B,C}, q uniform, eps(A) = 2 else 0. Then 1/c = 2/3, c = 3/2,
  // base weight c/(1+c) = 3/5, and p = (0.6, 0.2, 0.2).
  std::vector<double> q{1.0 / 3, 1.0 / 3, 1.0 / 3};
  AliasTable base(q);
  std::vector<std::size_t> support{0};
  std::vector<double> q_at{1.0 / 3};
  std::vector<double> eps{2.0};

  double c_inv = q_at[0] * eps[0];
  CHECK(c_inv == doctest::Approx(2.0 / 3));
  CHECK(1.0 / (1.0 + c_inv) == doctest::Approx(0.6));

  PerturbationContext ctx{&base, support, q_at, eps};
  Rng rng(1);
  const int n = 200000;
  std::vector<int> counts(3, 0);
  for (int i = 0; i < n; ++i) ++counts[perturbation_draw(ctx, rng)];
  CHECK(tv_distance(counts, {0.6, 0.2, 0.2}, n) < 0.01);
}

TEST_CASE("zero perturbation degenerates to the base pmf") {
  std::vector<double> q{0.5, 0.3, 0.2};
  AliasTable base(q);
  PerturbationContext ctx{&base, {}, {}, {}};
  Rng rng(2);
  const int n = 200000;
  std::vector<int> counts(3, 0);
  for (int i = 0; i < n; ++i) ++counts[perturbation_draw(ctx, rng)];
  CHECK(tv_distance(counts, q, n) < 0.01);
}

TEST_CASE("mixture identity holds pointwise") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 2 + rng.uniform_index(49);
    std::vector<double> q(n);
    for (auto& x : q) x = 0.01 + rng.uniform();
    double zq = std::accumulate(q.begin(), q.end(), 0.0);
    for (auto& x : q) x /= zq;
    std::vector<double> eps(n, 0.0);
    for (auto& x : eps) {
      if (rng.uniform() < 0.3) x = 5.0 * rng.uniform();
    }
    double c_inv = 0.0;
    for (std::size_t i = 0; i < n; ++i) c_inv += q[i] * eps[i];
    if (c_inv == 0.0) continue;
    double c = 1.0 / c_inv;
    double zp = 0.0;
    for (std::size_t i = 0; i < n; ++i) zp += q[i] * (1.0 + eps[i]);
    for (std::size_t i = 0; i < n; ++i) {
      double target = q[i] * (1.0 + eps[i]) / zp;
      double mixture = c / (1.0 + c) * q[i] + 1.0 / (1.0 + c) * (c * q[i] * eps[i]);
      CHECK(std::abs(target - mixture) <= 1e-12);
    }
  }
}

TEST_CASE("empirical distribution matches brute-force normalization") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t n = 3 + rng.uniform_index(48);
    std::vector<double> q(n);
    for (auto& x : q) x = 0.01 + rng.uniform();
    double zq = std::accumulate(q.begin(), q.end(), 0.0);
    for (auto& x : q) x /= zq;

    std::vector<std::size_t> support;
    std::vector<double> q_at, eps;
    std::vector<double> full_eps(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform() < 0.25) {
        double e = 4.0 * rng.uniform() + 0.1;
        support.push_back(i);
        q_at.push_back(q[i]);
        eps.push_back(e);
        full_eps[i] = e;
      }
    }

    std::vector<double> target(n);
    double zp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      target[i] = q[i] * (1.0 + full_eps[i]);
      zp += target[i];
    }
    for (auto& x : target) x /= zp;

    AliasTable base(q);
    PerturbationContext ctx{&base, support, q_at, eps};
    const int draws = 100000;
    std::vector<int> counts(n, 0);
    for (int i = 0; i < draws; ++i) ++counts[perturbation_draw(ctx, rng)];
    CHECK(tv_distance(counts, target, draws) < 0.01);
  }
}
