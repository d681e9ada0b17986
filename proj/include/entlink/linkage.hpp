#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "entlink/corpus.hpp"

namespace entlink {

/// A partition of the records: record -> cluster id, clusters densely
/// numbered from 0.
struct Clustering {
  std::vector<int> assignment;

  int records() const { return static_cast<int>(assignment.size()); }
  int clusters() const;
  std::vector<std::vector<int>> groups() const;

  /// Throws RuntimeAbort unless cluster ids are exactly 0..K-1.
  void validate() const;
};

/// Builds a clustering from arbitrary labels (entity ids, truth labels),
/// renumbering densely in order of first appearance.
Clustering clustering_from_labels(const std::vector<int>& labels);

/// Shared most-probable maximal matching sets: for each record, the most
/// frequent co-cluster set across the snapshots is found; records are then
/// committed in descending order of that frequency (ties broken by smallest
/// record id), each linking to the members of its mode set that are still
/// consistent with earlier commitments. Always returns a partition.
Clustering smpmms(const std::vector<std::vector<int>>& snapshots);

/// Records cluster together iff every attribute agrees exactly (missing
/// matches only missing).
Clustering exact_matching(const Corpus& corpus);

/// All record pairs agreeing on at least A-1 attributes. Not transitive, so
/// the result is a pair set, not a partition.
std::vector<std::pair<int, int>> near_matching(const Corpus& corpus);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ari = 0.0;                  // partitions only
  double cluster_count_error = 0.0;  // percent, partitions only
  long predicted_pairs = 0;
  long true_pairs = 0;
  long common_pairs = 0;
};

/// Pairwise precision/recall/F1 plus adjusted Rand index and cluster-count
/// percentage error, via cluster-size combinatorics.
Metrics evaluate(const Clustering& predicted, const std::vector<int>& truth_labels);

/// Pairwise metrics for a raw pair set (near matching); ARI and the count
/// error are not defined and left at 0.
Metrics evaluate_pairs(const std::vector<std::pair<int, int>>& predicted_pairs,
                       const std::vector<int>& truth_labels, int records);

}  // namespace entlink
