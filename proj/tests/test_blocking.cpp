#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "entlink/blocking.hpp"
#include "entlink/corpus.hpp"
#include "entlink/rng.hpp"

using namespace entlink;

namespace {

Corpus single_attr_corpus(const std::vector<std::string>& values) {
  Corpus c;
  c.schema = {{"v", AttributeKind::Categorical, 10.0, 0.0}};
  c.dictionaries.resize(1);
  c.dict_index.resize(1);
  c.table_sizes = {static_cast<int>(values.size())};
  for (std::size_t r = 0; r < values.size(); ++r) {
    c.rec_table.push_back(0);
    c.values.push_back(c.encode(0, values[r]));
  }
  return c;
}

}  // namespace

TEST_CASE("depth zero assigns everything to one block") {
  auto corpus = single_attr_corpus({"1", "2", "3"});
  auto tree = fit_tree(corpus, {0}, 0);
  CHECK(tree.blocks() == 1);
  for (int r = 0; r < corpus.records(); ++r) {
    std::vector<ValueId> y{corpus.value(r, 0)};
    CHECK(tree.assign(y) == 0);
  }
}

TEST_CASE("ordered-median split on {1,1,2,3,5,8}") {
  auto corpus = single_attr_corpus({"1", "1", "2", "3", "5", "8"});
  // Force the ordered-median rule regardless of distinct count.
  auto tree = fit_tree(corpus, {0}, 1, /*reference_max=*/0);
  REQUIRE(tree.nodes()[0].rule == SplitRule::OrderedMedian);
  CHECK(tree.nodes()[0].split_value == "2");

  auto block_of = [&](const std::string& v) {
    std::vector<ValueId> y{corpus.dict_index[0].at(v)};
    return tree.assign(y);
  };
  CHECK(block_of("1") == 0);
  CHECK(block_of("2") == 0);
  CHECK(block_of("3") == 1);
  CHECK(block_of("5") == 1);
  CHECK(block_of("8") == 1);
}

TEST_CASE("reference-set split on frequencies {a:5, b:3, c:2}") {
  std::vector<std::string> values;
  for (int i = 0; i < 5; ++i) values.emplace_back("a");
  for (int i = 0; i < 3; ++i) values.emplace_back("b");
  for (int i = 0; i < 2; ++i) values.emplace_back("c");
  auto corpus = single_attr_corpus(values);
  auto tree = fit_tree(corpus, {0}, 1);
  REQUIRE(tree.nodes()[0].rule == SplitRule::ReferenceSet);
  CHECK(tree.nodes()[0].reference == std::vector<std::string>{"a"});

  auto block_of = [&](const std::string& v) {
    std::vector<ValueId> y{corpus.dict_index[0].at(v)};
    return tree.assign(y);
  };
  CHECK(block_of("a") == 0);
  CHECK(block_of("b") == 1);
  CHECK(block_of("c") == 1);
}

TEST_CASE("assignment ignores attributes not used by any node") {
  Corpus c;
  c.schema = {{"u", AttributeKind::Categorical, 10.0, 0.0},
              {"v", AttributeKind::Categorical, 10.0, 0.0}};
  c.dictionaries.resize(2);
  c.dict_index.resize(2);
  c.table_sizes = {4};
  for (int r = 0; r < 4; ++r) {
    c.rec_table.push_back(0);
    c.values.push_back(c.encode(0, "u" + std::to_string(r)));
    c.values.push_back(c.encode(1, "v" + std::to_string(r % 2)));
  }
  auto tree = fit_tree(c, {1}, 1);  // splits only on attribute 1
  for (ValueId v = 0; v < 2; ++v) {
    int expect = tree.assign(std::vector<ValueId>{0, v});
    for (ValueId u = 0; u < 4; ++u) {
      CHECK(tree.assign(std::vector<ValueId>{u, v}) == expect);
    }
  }
}

TEST_CASE("totality over random and unseen values") {
  GeneratorConfig cfg;
  cfg.attributes = {{"fn", AttributeKind::String, 50, 1.0, 10.0, 7.0, {}, {}},
                    {"cat", AttributeKind::Categorical, 8, 1.0, 10.0, 0.0, {}, {}}};
  cfg.table_sizes = {400};
  cfg.entities = 200;
  auto corpus = generate_synthetic(cfg, 5);
  auto tree = fit_tree(corpus, {0, 1}, 2);

  // Extend the dictionaries with values never seen at fit time.
  auto dicts = corpus.dictionaries;
  for (auto& dict : dicts) {
    dict.push_back("zz_unseen_1");
    dict.push_back("");
    dict.push_back("aa");
  }
  tree.bind(dicts);

  Rng rng(77);
  for (int i = 0; i < 100000; ++i) {
    std::vector<ValueId> y{
        static_cast<ValueId>(rng.uniform_index(dicts[0].size())),
        static_cast<ValueId>(rng.uniform_index(dicts[1].size()))};
    int b = tree.assign(y);
    CHECK(b >= 0);
    CHECK(b < tree.blocks());
  }
}

TEST_CASE("serialization round-trips") {
  GeneratorConfig cfg;
  cfg.attributes = {{"fn", AttributeKind::String, 60, 0.5, 10.0, 7.0, {}, {}},
                    {"cat", AttributeKind::Categorical, 12, 1.0, 10.0, 0.0, {}, {}}};
  cfg.table_sizes = {600};
  cfg.entities = 300;
  auto corpus = generate_synthetic(cfg, 13);
  auto tree = fit_tree(corpus, {0, 1}, 3);

  std::stringstream buf;
  tree.serialize(buf);
  auto copy = BlockingTree::deserialize(buf, corpus.dictionaries);
  CHECK(copy.depth() == tree.depth());

  Rng rng(14);
  for (int i = 0; i < 5000; ++i) {
    std::vector<ValueId> y{
        static_cast<ValueId>(rng.uniform_index(corpus.dictionaries[0].size())),
        static_cast<ValueId>(rng.uniform_index(corpus.dictionaries[1].size()))};
    CHECK(copy.assign(y) == tree.assign(y));
  }
}

TEST_CASE("balance report arithmetic") {
  auto even = balance_report({50, 50});
  CHECK(even[0] == doctest::Approx(0.0));
  CHECK(even[1] == doctest::Approx(0.0));
  auto skew = balance_report({60, 40});
  CHECK(skew[0] == doctest::Approx(0.2));
  CHECK(skew[1] == doctest::Approx(0.2));
}

TEST_CASE("depth-3 tree is balanced on a large synthetic corpus") {
  GeneratorConfig cfg;
  cfg.attributes = {{"fname", AttributeKind::String, 300, 1.0, 10.0, 7.0, {}, {}},
                    {"lname", AttributeKind::String, 300, 1.0, 10.0, 7.0, {}, {}},
                    {"by", AttributeKind::Categorical, 80, 0.3, 10.0, 0.0, {}, {}},
                    {"bm", AttributeKind::Categorical, 12, 0.2, 10.0, 0.0, {}, {}},
                    {"bd", AttributeKind::Categorical, 28, 0.1, 10.0, 0.0, {}, {}}};
  cfg.table_sizes = {10000};
  cfg.mode = LinkMode::Duplication;
  cfg.duplicate_rate = 0.1;
  cfg.theta = {0.05};
  auto corpus = generate_synthetic(cfg, 99);
  auto tree = fit_tree(corpus, {0, 1, 2}, 3);

  std::vector<int> sizes(static_cast<std::size_t>(tree.blocks()), 0);
  std::vector<ValueId> y(5);
  for (int r = 0; r < corpus.records(); ++r) {
    for (int a = 0; a < 5; ++a) y[static_cast<std::size_t>(a)] = corpus.value(r, a);
    ++sizes[static_cast<std::size_t>(tree.assign(y))];
  }
  auto devs = balance_report(sizes);
  double max_dev = *std::max_element(devs.begin(), devs.end());
  CHECK(max_dev <= 0.10);
}
