#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "entlink/common.hpp"

namespace entlink {

/// Plain Levenshtein distance (unit costs).
std::size_t edit_distance(std::string_view v, std::string_view w);

/// Normalized edit similarity in [0, 1]:
///   1 - 2 d_Ed / (|v| + |w| + d_Ed).
/// Two empty strings compare as identical (similarity 1).
double edit_similarity(std::string_view v, std::string_view w);

/// Maps a raw similarity onto [0, s_max], zeroing everything at or below
/// s_cut and rescaling so that s_max stays fixed:
///   max(0, (s - s_cut) / (1 - s_cut / s_max)).
double truncate_similarity(double s, double s_cut, double s_max);

enum class MeasureKind { Constant, NormalizedEdit, Custom };

/// Symmetric bounded similarity measure on surface strings.
class SimilarityMeasure {
 public:
  static SimilarityMeasure constant(double s_max);

  /// s_max * edit_similarity(v, w).
  static SimilarityMeasure normalized_edit(double s_max);

  /// Converts a bounded symmetric distance into a similarity measure with
  /// s(v, w) = d_max - dist(v, w). Evaluation throws if the distance ever
  /// exceeds d_max.
  static SimilarityMeasure from_distance(
      std::function<double(std::string_view, std::string_view)> dist,
      double d_max);

  double operator()(std::string_view v, std::string_view w) const;

  MeasureKind kind() const { return kind_; }
  double s_max() const { return s_max_; }

 private:
  SimilarityMeasure(MeasureKind kind, double s_max,
                    std::function<double(std::string_view, std::string_view)> fn)
      : kind_(kind), s_max_(s_max), fn_(std::move(fn)) {}

  MeasureKind kind_;
  double s_max_;
  std::function<double(std::string_view, std::string_view)> fn_;
};

/// Per-attribute empirical distribution over the value dictionary.
using Empirical = std::vector<std::vector<double>>;

struct SimilaritySpec {
  bool constant = true;  // constant measure for categorical attributes
  double s_max = 10.0;
  double s_cut = 0.0;  // must be < s_max; 0 disables truncation for strings
};

/// Truncated similarity cache for a single attribute. Only pairs with
/// positive truncated similarity are stored; absent pairs are exactly zero.
/// Diagonal pairs always have similarity s_max and are kept implicit, as is
/// every pair of a constant-measure attribute.
struct AttributeCache {
  bool constant = true;
  double s_max = 10.0;
  double s_cut = 0.0;

  // Off-diagonal positive pairs, keyed by (min(v,w), max(v,w)).
  std::unordered_map<std::uint64_t, double> pairs;

  // Per value: off-diagonal neighbors with positive truncated similarity.
  std::vector<std::vector<std::pair<ValueId, double>>> neighbors;

  // h_a(w) = 1 / sum_v phi(v) exp(trunc_sim(v, w)).
  std::vector<double> h;

  static std::uint64_t key(ValueId v, ValueId w) {
    auto lo = static_cast<std::uint32_t>(v < w ? v : w);
    auto hi = static_cast<std::uint32_t>(v < w ? w : v);
    return (static_cast<std::uint64_t>(lo) << 32) | hi;
  }

  double trunc_sim(ValueId v, ValueId w) const {
    if (constant || v == w) return s_max;
    auto it = pairs.find(key(v, w));
    return it == pairs.end() ? 0.0 : it->second;
  }

  // Effective quantities with the constant-measure factor exp(s_max)
  // cancelled against h; products of psi terms are unchanged.
  double eff_trunc_sim(ValueId v, ValueId w) const {
    return constant ? 0.0 : trunc_sim(v, w);
  }
  double eff_h(ValueId w) const { return constant ? 1.0 : h[static_cast<std::size_t>(w)]; }
};

class Corpus;  // forward declaration (corpus.hpp)

class SimilarityCache {
 public:
  /// Exhaustive pairwise scan per attribute domain with a length-difference
  /// prefilter derived from the cutoff.
  static SimilarityCache build(
      const std::vector<std::vector<std::string>>& domains,
      const Empirical& phi, const std::vector<SimilaritySpec>& specs);

  static SimilarityCache build(const Corpus& corpus, const Empirical& phi);

  int attributes() const { return static_cast<int>(attrs_.size()); }
  const AttributeCache& attr(int a) const { return attrs_[static_cast<std::size_t>(a)]; }

  double trunc_sim(int a, ValueId v, ValueId w) const {
    return attrs_[static_cast<std::size_t>(a)].trunc_sim(v, w);
  }

  double h(int a, ValueId w) const {
    return attrs_[static_cast<std::size_t>(a)].h[static_cast<std::size_t>(w)];
  }

  /// psi_a(v | w) = h_a(w) phi_a(v) exp(trunc_sim_a(v, w)).
  /// For constant-measure attributes this reduces to phi_a(v) exactly.
  double psi(int a, ValueId v, ValueId w, const Empirical& phi) const {
    const AttributeCache& c = attrs_[static_cast<std::size_t>(a)];
    const double p = phi[static_cast<std::size_t>(a)][static_cast<std::size_t>(v)];
    if (c.constant) return p;
    return c.h[static_cast<std::size_t>(w)] * p * std::exp(c.trunc_sim(v, w));
  }

  /// Full distortion pmf psi_a(. | w); sums to 1 up to rounding.
  std::vector<double> distortion_pmf(int a, ValueId w, const Empirical& phi) const;

 private:
  std::vector<AttributeCache> attrs_;
};

}  // namespace entlink
