#include "entlink/linkage.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

namespace entlink {

namespace {

double choose2(double n) { return n * (n - 1.0) / 2.0; }

long choose2l(long n) { return n * (n - 1) / 2; }

}  // namespace

int Clustering::clusters() const {
  int k = 0;
  for (int c : assignment) k = std::max(k, c + 1);
  return k;
}

std::vector<std::vector<int>> Clustering::groups() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(clusters()));
  for (int r = 0; r < records(); ++r) {
    out[static_cast<std::size_t>(assignment[static_cast<std::size_t>(r)])].push_back(r);
  }
  return out;
}

void Clustering::validate() const {
  const int k = clusters();
  std::vector<char> seen(static_cast<std::size_t>(k), 0);
  for (int c : assignment) {
    if (c < 0 || c >= k) throw RuntimeAbort("clustering: id out of range");
    seen[static_cast<std::size_t>(c)] = 1;
  }
  for (char s : seen) {
    if (!s) throw RuntimeAbort("clustering: cluster ids not dense");
  }
}

Clustering clustering_from_labels(const std::vector<int>& labels) {
  Clustering out;
  out.assignment.reserve(labels.size());
  std::unordered_map<int, int> dense;
  for (int label : labels) {
    auto [it, inserted] = dense.emplace(label, static_cast<int>(dense.size()));
    out.assignment.push_back(it->second);
  }
  return out;
}

Clustering smpmms(const std::vector<std::vector<int>>& snapshots) {
  if (snapshots.empty()) throw DataError("smpmms: at least one snapshot required");
  const std::size_t records = snapshots.front().size();
  if (records == 0) throw DataError("smpmms: empty snapshots");

  // Co-cluster set of every record in every snapshot (sets shared within a
  // snapshot, sorted by construction).
  std::vector<std::vector<std::vector<int>>> snapshot_sets;  // per snapshot clusters
  std::vector<std::vector<const std::vector<int>*>> record_sets(
      records, std::vector<const std::vector<int>*>(snapshots.size()));
  snapshot_sets.reserve(snapshots.size());
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const auto& lambda = snapshots[s];
    if (lambda.size() != records) throw DataError("smpmms: ragged snapshots");
    std::unordered_map<int, int> cluster_of;
    auto& clusters = snapshot_sets.emplace_back();
    for (std::size_t r = 0; r < records; ++r) {
      auto [it, inserted] = cluster_of.emplace(lambda[r], static_cast<int>(clusters.size()));
      if (inserted) clusters.emplace_back();
      clusters[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(r));
    }
    for (const auto& members : clusters) {
      for (int r : members) record_sets[static_cast<std::size_t>(r)][s] = &members;
    }
  }

  // Step 1: per-record mode co-cluster set with its frequency. Ties between
  // equally frequent sets go to the lexicographically smallest set.
  struct Mode {
    const std::vector<int>* set = nullptr;
    int frequency = 0;
  };
  std::vector<Mode> modes(records);
  for (std::size_t r = 0; r < records; ++r) {
    auto& sets = record_sets[r];
    std::sort(sets.begin(), sets.end(),
              [](const std::vector<int>* a, const std::vector<int>* b) {
                return *a < *b;
              });
    std::size_t i = 0;
    while (i < sets.size()) {
      std::size_t j = i;
      while (j < sets.size() && *sets[j] == *sets[i]) ++j;
      const int count = static_cast<int>(j - i);
      if (count > modes[r].frequency) modes[r] = {sets[i], count};
      i = j;
    }
  }

  // Step 2: commit records in precedence order (higher mode frequency first,
  // then smaller record id); a committed record is never reassigned.
  std::vector<int> order(records);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const int fa = modes[static_cast<std::size_t>(a)].frequency;
    const int fb = modes[static_cast<std::size_t>(b)].frequency;
    return fa != fb ? fa > fb : a < b;
  });

  Clustering out;
  out.assignment.assign(records, -1);
  int next_cluster = 0;
  for (int r : order) {
    if (out.assignment[static_cast<std::size_t>(r)] != -1) continue;
    const int cluster = next_cluster++;
    for (int member : *modes[static_cast<std::size_t>(r)].set) {
      if (out.assignment[static_cast<std::size_t>(member)] == -1) {
        out.assignment[static_cast<std::size_t>(member)] = cluster;
      }
    }
  }
  out.validate();
  return out;
}

Clustering exact_matching(const Corpus& corpus) {
  const int records = corpus.records();
  const int attributes = corpus.attributes();
  std::map<std::vector<ValueId>, int> clusters;
  Clustering out;
  out.assignment.reserve(static_cast<std::size_t>(records));
  std::vector<ValueId> key(static_cast<std::size_t>(attributes));
  for (int r = 0; r < records; ++r) {
    for (int a = 0; a < attributes; ++a) key[static_cast<std::size_t>(a)] = corpus.value(r, a);
    auto [it, inserted] = clusters.emplace(key, static_cast<int>(clusters.size()));
    out.assignment.push_back(it->second);
  }
  return out;
}

std::vector<std::pair<int, int>> near_matching(const Corpus& corpus) {
  const int records = corpus.records();
  const int attributes = corpus.attributes();
  if (attributes < 2) throw DataError("near_matching: needs at least 2 attributes");
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < records; ++i) {
    for (int j = i + 1; j < records; ++j) {
      int mismatches = 0;
      for (int a = 0; a < attributes && mismatches < 2; ++a) {
        if (corpus.value(i, a) != corpus.value(j, a)) ++mismatches;
      }
      if (mismatches <= 1) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

namespace {

Metrics pairwise_from_counts(long predicted, long truth, long common) {
  Metrics m;
  m.predicted_pairs = predicted;
  m.true_pairs = truth;
  m.common_pairs = common;
  m.precision = predicted == 0 ? 1.0
                               : static_cast<double>(common) / static_cast<double>(predicted);
  m.recall = truth == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(truth);
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

}  // namespace

Metrics evaluate(const Clustering& predicted, const std::vector<int>& truth_labels) {
  const std::size_t records = truth_labels.size();
  if (predicted.assignment.size() != records) {
    throw DataError("evaluate: truth must cover all records");
  }
  Clustering truth = clustering_from_labels(truth_labels);

  const int kp = predicted.clusters();
  const int kt = truth.clusters();
  std::vector<long> pred_sizes(static_cast<std::size_t>(kp), 0);
  std::vector<long> true_sizes(static_cast<std::size_t>(kt), 0);
  std::map<std::pair<int, int>, long> joint;
  for (std::size_t r = 0; r < records; ++r) {
    const int p = predicted.assignment[r];
    const int t = truth.assignment[r];
    ++pred_sizes[static_cast<std::size_t>(p)];
    ++true_sizes[static_cast<std::size_t>(t)];
    ++joint[{p, t}];
  }

  long predicted_pairs = 0, true_pairs = 0, common = 0;
  for (long n : pred_sizes) predicted_pairs += choose2l(n);
  for (long n : true_sizes) true_pairs += choose2l(n);
  for (const auto& kv : joint) common += choose2l(kv.second);

  Metrics m = pairwise_from_counts(predicted_pairs, true_pairs, common);

  const double total_pairs = choose2(static_cast<double>(records));
  const double expected = total_pairs > 0.0
                              ? static_cast<double>(predicted_pairs) *
                                    static_cast<double>(true_pairs) / total_pairs
                              : 0.0;
  const double max_index =
      0.5 * (static_cast<double>(predicted_pairs) + static_cast<double>(true_pairs));
  const double denom = max_index - expected;
  m.ari = denom != 0.0 ? (static_cast<double>(common) - expected) / denom : 1.0;
  m.cluster_count_error =
      kt > 0 ? 100.0 * static_cast<double>(kp - kt) / static_cast<double>(kt) : 0.0;
  return m;
}

Metrics evaluate_pairs(const std::vector<std::pair<int, int>>& predicted_pairs,
                       const std::vector<int>& truth_labels, int records) {
  if (static_cast<int>(truth_labels.size()) != records) {
    throw DataError("evaluate_pairs: truth must cover all records");
  }
  Clustering truth = clustering_from_labels(truth_labels);
  std::vector<long> true_sizes(static_cast<std::size_t>(truth.clusters()), 0);
  for (int c : truth.assignment) ++true_sizes[static_cast<std::size_t>(c)];
  long true_pairs = 0;
  for (long n : true_sizes) true_pairs += choose2l(n);

  long common = 0;
  for (const auto& [i, j] : predicted_pairs) {
    if (i < 0 || j < 0 || i >= records || j >= records || i == j) {
      throw DataError("evaluate_pairs: pair out of range");
    }
    if (truth.assignment[static_cast<std::size_t>(i)] ==
        truth.assignment[static_cast<std::size_t>(j)]) {
      ++common;
    }
  }
  return pairwise_from_counts(static_cast<long>(predicted_pairs.size()), true_pairs,
                              common);
}

}  // namespace entlink
