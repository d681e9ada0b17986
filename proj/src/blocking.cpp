#include "entlink/blocking.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "entlink/corpus.hpp"

namespace entlink {

BlockingTree::BlockingTree(int depth, std::vector<Node> nodes)
    : depth_(depth), nodes_(std::move(nodes)) {
  if (depth_ < 0) throw ConfigError("tree depth must be nonnegative");
  if (nodes_.size() != static_cast<std::size_t>((1 << depth_) - 1)) {
    throw ConfigError("node count does not match tree depth");
  }
}

bool BlockingTree::route_left(const Node& node, const std::string& value) const {
  switch (node.rule) {
    case SplitRule::OrderedMedian:
      return value <= node.split_value;
    case SplitRule::ReferenceSet:
      return std::binary_search(node.reference.begin(), node.reference.end(), value);
    default:
      return true;
  }
}

void BlockingTree::bind(const std::vector<std::vector<std::string>>& dictionaries) {
  left_mask_.assign(nodes_.size(), {});
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& node = nodes_[i];
    const auto& dict = dictionaries[static_cast<std::size_t>(node.attr)];
    auto& mask = left_mask_[i];
    mask.resize(dict.size());
    for (std::size_t v = 0; v < dict.size(); ++v) {
      mask[v] = route_left(node, dict[v]) ? 1 : 0;
    }
  }
}

int BlockingTree::assign(const ValueId* y) const {
  if (depth_ == 0) return 0;
  std::size_t i = 0;
  for (int level = 0; level < depth_; ++level) {
    const Node& node = nodes_[i];
    ValueId v = y[node.attr];
    bool left = left_mask_[i][static_cast<std::size_t>(v)] != 0;
    i = 2 * i + (left ? 1 : 2);
  }
  return static_cast<int>(i) - (blocks() - 1);
}

namespace {

void write_string(std::ostream& out, const std::string& s) {
  out << s.size() << ' ' << s;
}

std::string read_string(std::istream& in) {
  std::size_t len = 0;
  in >> len;
  in.get();  // separator
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("truncated tree payload");
  return s;
}

}  // namespace

void BlockingTree::serialize(std::ostream& out) const {
  out << "tree 1 " << depth_ << '\n';
  for (const Node& node : nodes_) {
    out << node.attr << ' ';
    switch (node.rule) {
      case SplitRule::OrderedMedian:
        out << "median ";
        write_string(out, node.split_value);
        break;
      case SplitRule::ReferenceSet:
        out << "reference " << node.reference.size();
        for (const auto& s : node.reference) {
          out << ' ';
          write_string(out, s);
        }
        break;
      default:
        out << "pass";
        break;
    }
    out << '\n';
  }
}

BlockingTree BlockingTree::deserialize(
    std::istream& in, const std::vector<std::vector<std::string>>& dicts) {
  std::string magic;
  int version = 0, depth = 0;
  in >> magic >> version >> depth;
  if (magic != "tree" || version != 1) throw DataError("bad tree header");
  std::vector<Node> nodes(static_cast<std::size_t>((1 << depth) - 1));
  for (auto& node : nodes) {
    std::string rule;
    in >> node.attr >> rule;
    if (rule == "median") {
      node.rule = SplitRule::OrderedMedian;
      node.split_value = read_string(in);
    } else if (rule == "reference") {
      node.rule = SplitRule::ReferenceSet;
      std::size_t count = 0;
      in >> count;
      node.reference.reserve(count);
      for (std::size_t i = 0; i < count; ++i) node.reference.push_back(read_string(in));
    } else if (rule == "pass") {
      node.rule = SplitRule::PassThrough;
    } else {
      throw DataError("unknown split rule: " + rule);
    }
  }
  if (!in) throw DataError("truncated tree");
  BlockingTree tree(depth, std::move(nodes));
  tree.bind(dicts);
  return tree;
}

std::string BlockingTree::dump(const Corpus& corpus) const {
  std::ostringstream out;
  out << "depth " << depth_ << ", blocks " << blocks() << '\n';
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    int level = 0;
    for (std::size_t j = i + 1; j > 1; j /= 2) ++level;
    const Node& node = nodes_[i];
    out << std::string(static_cast<std::size_t>(level) * 2, ' ') << "node " << i
        << " [" << corpus.schema[static_cast<std::size_t>(node.attr)].name << "] ";
    switch (node.rule) {
      case SplitRule::OrderedMedian:
        out << "left iff value <= \"" << node.split_value << "\"";
        break;
      case SplitRule::ReferenceSet: {
        out << "left iff value in {";
        for (std::size_t k = 0; k < node.reference.size(); ++k) {
          out << (k ? ", " : "") << '"' << node.reference[k] << '"';
        }
        out << "}";
        break;
      }
      default:
        out << "pass-through (degenerate sample)";
        break;
    }
    out << '\n';
  }
  return out.str();
}

namespace {

BlockingTree::Node fit_node(const Corpus& corpus, const std::vector<int>& sample,
                            int attr, int reference_max) {
  BlockingTree::Node node;
  node.attr = attr;

  // Frequencies over observed sample values, keyed by surface string so the
  // split ordering is lexicographic.
  std::map<std::string, long> counts;
  long total = 0;
  for (int r : sample) {
    ValueId v = corpus.value(r, attr);
    if (v == kMissing) continue;
    ++counts[corpus.surface(attr, v)];
    ++total;
  }
  if (total == 0) return node;  // pass-through

  if (counts.size() <= static_cast<std::size_t>(reference_max)) {
    node.rule = SplitRule::ReferenceSet;
    // First-fit bin packing over values in descending frequency (ties by
    // value order); capacity half the mass; the fuller bin is the set.
    std::vector<std::pair<std::string, long>> items(counts.begin(), counts.end());
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    const long cap = (total + 1) / 2;
    long load1 = 0, load2 = 0;
    std::vector<std::string> bin1, bin2;
    for (auto& [value, n] : items) {
      if (load1 + n <= cap) {
        load1 += n;
        bin1.push_back(value);
      } else if (load2 + n <= cap) {
        load2 += n;
        bin2.push_back(value);
      } else if (load1 <= load2) {
        load1 += n;
        bin1.push_back(value);
      } else {
        load2 += n;
        bin2.push_back(value);
      }
    }
    node.reference = load1 >= load2 ? std::move(bin1) : std::move(bin2);
    std::sort(node.reference.begin(), node.reference.end());
  } else {
    node.rule = SplitRule::OrderedMedian;
    // Cut after the value whose cumulative count is closest to an even
    // split; the last value is excluded so the right side stays nonempty.
    const double half = static_cast<double>(total) / 2.0;
    double best_gap = std::numeric_limits<double>::infinity();
    long cum = 0;
    node.split_value = counts.begin()->first;
    for (auto& [value, n] : counts) {
      cum += n;
      if (cum >= total) break;
      const double gap = std::abs(static_cast<double>(cum) - half);
      if (gap < best_gap) {
        best_gap = gap;
        node.split_value = value;
      }
    }
  }
  return node;
}

void fit_recursive(const Corpus& corpus, const std::vector<int>& attrs, int depth,
                   int reference_max, int level, std::size_t index,
                   const std::vector<int>& sample,
                   std::vector<BlockingTree::Node>& nodes,
                   const BlockingTree& router) {
  if (level == depth) return;
  int attr = attrs[static_cast<std::size_t>(level) % attrs.size()];
  nodes[index] = fit_node(corpus, sample, attr, reference_max);

  std::vector<int> left, right;
  for (int r : sample) {
    ValueId v = corpus.value(r, attr);
    if (v == kMissing) continue;  // ambiguous routing; drop below this node
    if (router.route_left(nodes[index], corpus.surface(attr, v))) {
      left.push_back(r);
    } else {
      right.push_back(r);
    }
  }
  fit_recursive(corpus, attrs, depth, reference_max, level + 1, 2 * index + 1, left,
                nodes, router);
  fit_recursive(corpus, attrs, depth, reference_max, level + 1, 2 * index + 2, right,
                nodes, router);
}

}  // namespace

BlockingTree fit_tree(const Corpus& corpus, const std::vector<int>& attrs, int depth,
                      int reference_max) {
  if (attrs.empty()) throw ConfigError("blocking needs at least one attribute");
  if (depth < 0) throw ConfigError("tree depth must be nonnegative");
  for (int a : attrs) {
    if (a < 0 || a >= corpus.attributes()) {
      throw ConfigError("blocking attribute index out of range");
    }
  }
  std::vector<BlockingTree::Node> nodes(static_cast<std::size_t>((1 << depth) - 1));
  std::vector<int> sample(static_cast<std::size_t>(corpus.records()));
  for (int r = 0; r < corpus.records(); ++r) sample[static_cast<std::size_t>(r)] = r;

  BlockingTree router;  // only route_left used during fitting
  fit_recursive(corpus, attrs, depth, reference_max, 0, 0, sample, nodes, router);

  BlockingTree tree(depth, std::move(nodes));
  tree.bind(corpus.dictionaries);
  return tree;
}

std::vector<double> balance_report(const std::vector<int>& block_sizes) {
  if (block_sizes.empty()) return {};
  double total = 0.0;
  for (int n : block_sizes) total += n;
  double mean = total / static_cast<double>(block_sizes.size());
  std::vector<double> out;
  out.reserve(block_sizes.size());
  for (int n : block_sizes) {
    out.push_back(mean == 0.0 ? 0.0 : std::abs(n - mean) / mean);
  }
  return out;
}

}  // namespace entlink
