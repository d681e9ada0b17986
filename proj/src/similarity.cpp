#include "entlink/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "entlink/corpus.hpp"

namespace entlink {

std::size_t edit_distance(std::string_view v, std::string_view w) {
  if (v.size() > w.size()) std::swap(v, w);
  const std::size_t m = v.size();
  const std::size_t n = w.size();
  std::vector<std::size_t> row(m + 1);
  for (std::size_t i = 0; i <= m; ++i) row[i] = i;
  for (std::size_t j = 1; j <= n; ++j) {
    std::size_t diag = row[0];
    row[0] = j;
    for (std::size_t i = 1; i <= m; ++i) {
      std::size_t sub = diag + (v[i - 1] == w[j - 1] ? 0 : 1);
      diag = row[i];
      row[i] = std::min({row[i] + 1, row[i - 1] + 1, sub});
    }
  }
  return row[m];
}

double edit_similarity(std::string_view v, std::string_view w) {
  const auto d = static_cast<double>(edit_distance(v, w));
  const double denom = static_cast<double>(v.size() + w.size()) + d;
  if (denom == 0.0) return 1.0;  // both strings empty
  return 1.0 - 2.0 * d / denom;
}

double truncate_similarity(double s, double s_cut, double s_max) {
  if (!(s_cut < s_max)) throw ConfigError("similarity cutoff must be below s_max");
  double t = (s - s_cut) / (1.0 - s_cut / s_max);
  return t > 0.0 ? t : 0.0;
}

SimilarityMeasure SimilarityMeasure::constant(double s_max) {
  return SimilarityMeasure(MeasureKind::Constant, s_max,
                           [s_max](std::string_view, std::string_view) { return s_max; });
}

SimilarityMeasure SimilarityMeasure::normalized_edit(double s_max) {
  return SimilarityMeasure(
      MeasureKind::NormalizedEdit, s_max,
      [s_max](std::string_view v, std::string_view w) { return s_max * edit_similarity(v, w); });
}

SimilarityMeasure SimilarityMeasure::from_distance(
    std::function<double(std::string_view, std::string_view)> dist, double d_max) {
  auto fn = [dist = std::move(dist), d_max](std::string_view v, std::string_view w) {
    double d = dist(v, w);
    if (d < 0.0 || d > d_max) {
      throw std::invalid_argument("distance out of [0, d_max]");
    }
    return d_max - d;
  };
  return SimilarityMeasure(MeasureKind::Custom, d_max, std::move(fn));
}

double SimilarityMeasure::operator()(std::string_view v, std::string_view w) const {
  return fn_(v, w);
}

namespace {

void compute_normalizers(AttributeCache& c, const std::vector<double>& phi) {
  const std::size_t n = phi.size();
  c.h.assign(n, 0.0);
  if (c.constant) {
    // sum_v phi(v) exp(s_max) = exp(s_max).
    const double h = std::exp(-c.s_max);
    for (std::size_t w = 0; w < n; ++w) c.h[w] = h;
    return;
  }
  const double boost_self = std::exp(c.s_max) - 1.0;
  for (std::size_t w = 0; w < n; ++w) {
    // Implicit-zero default contributes sum_v phi(v) = 1; stored pairs and
    // the diagonal contribute their excess over exp(0).
    double sum = 1.0 + phi[w] * boost_self;
    for (const auto& [v, ts] : c.neighbors[w]) {
      sum += phi[static_cast<std::size_t>(v)] * (std::exp(ts) - 1.0);
    }
    c.h[w] = 1.0 / sum;
  }
}

}  // namespace

SimilarityCache SimilarityCache::build(
    const std::vector<std::vector<std::string>>& domains, const Empirical& phi,
    const std::vector<SimilaritySpec>& specs) {
  SimilarityCache cache;
  cache.attrs_.resize(specs.size());
  for (std::size_t a = 0; a < specs.size(); ++a) {
    AttributeCache& c = cache.attrs_[a];
    c.constant = specs[a].constant;
    c.s_max = specs[a].s_max;
    c.s_cut = specs[a].s_cut;
    const auto& domain = domains[a];
    c.neighbors.assign(domain.size(), {});
    if (c.constant) {
      compute_normalizers(c, phi[a]);
      continue;
    }
    if (!(c.s_cut >= 0.0 && c.s_cut < c.s_max)) {
      throw ConfigError("similarity cutoff must satisfy 0 <= s_cut < s_max");
    }
    // Positive truncated similarity requires d_nEd < r, which bounds the
    // length difference: |len(v)-len(w)| < r (|v|+|w|) / (2-r).
    const double r = 1.0 - c.s_cut / c.s_max;
    for (std::size_t i = 0; i < domain.size(); ++i) {
      for (std::size_t j = i + 1; j < domain.size(); ++j) {
        const double li = static_cast<double>(domain[i].size());
        const double lj = static_cast<double>(domain[j].size());
        if (std::abs(li - lj) * (2.0 - r) >= r * (li + lj) && li + lj > 0.0) continue;
        double raw = c.s_max * edit_similarity(domain[i], domain[j]);
        double ts = truncate_similarity(raw, c.s_cut, c.s_max);
        if (ts > 0.0) {
          auto v = static_cast<ValueId>(i);
          auto w = static_cast<ValueId>(j);
          c.pairs.emplace(AttributeCache::key(v, w), ts);
          c.neighbors[i].emplace_back(w, ts);
          c.neighbors[j].emplace_back(v, ts);
        }
      }
    }
    for (auto& nb : c.neighbors) std::sort(nb.begin(), nb.end());
    compute_normalizers(c, phi[a]);
  }
  return cache;
}

SimilarityCache SimilarityCache::build(const Corpus& corpus, const Empirical& phi) {
  std::vector<SimilaritySpec> specs;
  specs.reserve(corpus.schema.size());
  for (const auto& attr : corpus.schema) {
    SimilaritySpec spec;
    spec.constant = attr.kind == AttributeKind::Categorical;
    spec.s_max = attr.s_max;
    spec.s_cut = attr.s_cut;
    specs.push_back(spec);
  }
  return build(corpus.dictionaries, phi, specs);
}

std::vector<double> SimilarityCache::distortion_pmf(int a, ValueId w,
                                                    const Empirical& phi) const {
  const auto& p = phi[static_cast<std::size_t>(a)];
  std::vector<double> pmf(p.size());
  for (std::size_t v = 0; v < p.size(); ++v) {
    pmf[v] = psi(a, static_cast<ValueId>(v), w, phi);
  }
  return pmf;
}

}  // namespace entlink
