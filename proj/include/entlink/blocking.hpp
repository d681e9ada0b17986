#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "entlink/common.hpp"

namespace entlink {

class Corpus;

enum class SplitRule { OrderedMedian, ReferenceSet, PassThrough };

/// Full binary tree of depth d over entity attribute vectors; leaves are the
/// B = 2^d blocks (0-based ids). Split payloads are surface strings so the
/// rule is total on any value, seen at fit time or not; per-dictionary
/// routing masks are precomputed for O(1) evaluation on value ids.
class BlockingTree {
 public:
  struct Node {
    int attr = 0;
    SplitRule rule = SplitRule::PassThrough;
    std::string split_value;             // ordered-median: route left iff v <= split
    std::vector<std::string> reference;  // reference-set: route left iff member
  };

  BlockingTree() = default;
  BlockingTree(int depth, std::vector<Node> nodes);

  int depth() const { return depth_; }
  int blocks() const { return 1 << depth_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Precomputes routing masks against the given dictionaries. Must be
  /// called (fit_tree and deserialize do) before assigning by value id.
  void bind(const std::vector<std::vector<std::string>>& dictionaries);

  /// Block for a full attribute vector of value ids (relative to the bound
  /// dictionaries). Deterministic and total.
  int assign(const ValueId* y) const;
  int assign(const std::vector<ValueId>& y) const { return assign(y.data()); }

  /// Routing on raw surface strings (handles values outside the bound
  /// dictionaries; used by tests and the mask builder).
  bool route_left(const Node& node, const std::string& value) const;

  void serialize(std::ostream& out) const;
  static BlockingTree deserialize(std::istream& in,
                                  const std::vector<std::vector<std::string>>& dicts);

  /// Human-readable tree description (attribute names resolved via schema).
  std::string dump(const Corpus& corpus) const;

 private:
  int depth_ = 0;
  std::vector<Node> nodes_;                      // 2^d - 1, heap order
  std::vector<std::vector<char>> left_mask_;     // per node, per value id
};

/// Fits a depth-d tree on the corpus records. Attributes cycle round-robin
/// through `attrs` by node depth. Nodes whose routed sample has at most
/// `reference_max` distinct values use the reference-set rule (first-fit bin
/// packing by descending frequency), others the ordered-median rule.
/// Records missing the node attribute are dropped below that node; an empty
/// sample yields a pass-through node.
BlockingTree fit_tree(const Corpus& corpus, const std::vector<int>& attrs,
                      int depth, int reference_max = 30);

/// Relative absolute deviations |n_b - mean| / mean of per-block counts.
std::vector<double> balance_report(const std::vector<int>& block_sizes);

}  // namespace entlink
