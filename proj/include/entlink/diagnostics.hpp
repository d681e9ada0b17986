#pragma once

#include <string>
#include <vector>

#include "entlink/model.hpp"

namespace entlink {

/// Per-iteration summary statistics. Cluster sizes above k_max land in the
/// overflow bucket (last entry). Wall-clock time is tracked separately so
/// traces stay byte-identical across runs.
struct SummaryRow {
  long iteration = 0;
  int observed_entities = 0;           // entities with at least one record
  std::vector<long> agg_distortion;    // per attribute, observed cells with z=1
  std::vector<int> cluster_size_dist;  // counts for sizes 0..k_max, then >k_max
  long overflow_records = 0;           // records inside clusters larger than k_max

  /// Throws RuntimeAbort when the structural identities fail.
  void validate(int records, int entities) const;
};

inline constexpr int kClusterSizeMax = 10;

SummaryRow summarize(const ModelState& state, const Corpus& corpus,
                     int k_max = kClusterSizeMax);

struct EssResult {
  double ess = 0.0;
  bool degenerate = false;  // constant series
};

/// Effective sample size via non-overlapping batch means with
/// floor(sqrt(N)) batches; clamped to [1, N]. Needs at least 10 points.
EssResult ess(const std::vector<double>& series);

/// ess(series) / seconds.
double ess_rate(const std::vector<double>& series, double seconds);

/// Sample autocorrelation at lags 0..max_lag.
std::vector<double> autocorrelation(const std::vector<double>& series, int max_lag);

}  // namespace entlink
