#include "entlink/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace entlink {

void SummaryRow::validate(int records, int entities) const {
  long total_clusters = 0;
  long total_records = overflow_records;
  for (std::size_t k = 0; k < cluster_size_dist.size(); ++k) {
    total_clusters += cluster_size_dist[k];
    if (k + 1 < cluster_size_dist.size()) {
      total_records += static_cast<long>(k) * cluster_size_dist[k];
    }
  }
  if (total_clusters != entities) {
    throw RuntimeAbort("summary row: cluster counts do not sum to E");
  }
  if (total_records != records) {
    throw RuntimeAbort("summary row: cluster sizes do not sum to R");
  }
  if (observed_entities !=
      entities - (cluster_size_dist.empty() ? 0 : cluster_size_dist[0])) {
    throw RuntimeAbort("summary row: observed-entity count inconsistent");
  }
}

SummaryRow summarize(const ModelState& state, const Corpus& corpus, int k_max) {
  SummaryRow row;
  row.agg_distortion.assign(static_cast<std::size_t>(state.A), 0);
  for (int r = 0; r < state.R; ++r) {
    for (int a = 0; a < state.A; ++a) {
      if (corpus.observed(r, a) && state.z(r, a) != 0) {
        ++row.agg_distortion[static_cast<std::size_t>(a)];
      }
    }
  }

  std::vector<int> cluster_size(static_cast<std::size_t>(state.E), 0);
  for (int r = 0; r < state.R; ++r) {
    ++cluster_size[static_cast<std::size_t>(state.lambda[static_cast<std::size_t>(r)])];
  }
  row.cluster_size_dist.assign(static_cast<std::size_t>(k_max) + 2, 0);
  for (int size : cluster_size) {
    if (size > 0) ++row.observed_entities;
    if (size <= k_max) {
      ++row.cluster_size_dist[static_cast<std::size_t>(size)];
    } else {
      ++row.cluster_size_dist.back();
      row.overflow_records += size;
    }
  }
  row.validate(state.R, state.E);
  return row;
}

EssResult ess(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 10) throw std::invalid_argument("ess: need at least 10 points");

  const double mean = std::accumulate(series.begin(), series.end(), 0.0) /
                      static_cast<double>(n);
  double s2 = 0.0;
  for (double x : series) s2 += (x - mean) * (x - mean);
  s2 /= static_cast<double>(n - 1);
  if (s2 <= 0.0) return {static_cast<double>(n), true};

  const std::size_t b = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  const std::size_t m = n / b;  // batches; trailing remainder dropped
  const double used = static_cast<double>(m * b);
  const double grand =
      std::accumulate(series.begin(), series.begin() + static_cast<long>(m * b), 0.0) /
      used;
  double var_bm = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double bm = 0.0;
    for (std::size_t i = 0; i < b; ++i) bm += series[j * b + i];
    bm /= static_cast<double>(b);
    var_bm += (bm - grand) * (bm - grand);
  }
  var_bm *= static_cast<double>(b) / static_cast<double>(m - 1);
  if (var_bm <= 0.0) return {static_cast<double>(n), true};

  double value = static_cast<double>(n) * s2 / var_bm;
  value = std::clamp(value, 1.0, static_cast<double>(n));
  return {value, false};
}

double ess_rate(const std::vector<double>& series, double seconds) {
  if (seconds <= 0.0) throw std::invalid_argument("ess_rate: seconds must be > 0");
  return ess(series).ess / seconds;
}

std::vector<double> autocorrelation(const std::vector<double>& series, int max_lag) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("autocorrelation: need at least 2 points");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) /
                      static_cast<double>(n);
  double c0 = 0.0;
  for (double x : series) c0 += (x - mean) * (x - mean);
  std::vector<double> acf;
  acf.reserve(static_cast<std::size_t>(max_lag) + 1);
  for (int lag = 0; lag <= max_lag && static_cast<std::size_t>(lag) < n; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + static_cast<std::size_t>(lag) < n; ++i) {
      c += (series[i] - mean) * (series[i + static_cast<std::size_t>(lag)] - mean);
    }
    acf.push_back(c0 > 0.0 ? c / c0 : (lag == 0 ? 1.0 : 0.0));
  }
  return acf;
}

}  // namespace entlink
