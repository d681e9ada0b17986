#include <doctest.h>

#include <sstream>

#include "entlink/config.hpp"

using namespace entlink;

namespace {

const char* kSample = R"(
# sample run configuration
[data]
truth_column = true_id

[attributes]
fn = string s_max=10 s_cut=7 domain=20 zipf=0.5
cat = categorical domain=6

[model]
entities = auto
alpha = auto
beta = auto

[blocking]
attributes = fn
depth = 1

[sampler]
variant = pcg1
iterations = 50
thin = 5
checkpoint_interval = 25
seed = 9
parallel = false

[output]
dir = out/sample

[generator]
mode = duplication
records = 120
duplicate_rate = 0.1
theta = 0.05
eta = 1.0
seed = 3
)";

RunSettings sample_settings() {
  std::istringstream in(kSample);
  return parse_run_config(parse_ini(in));
}

}  // namespace

TEST_CASE("parse_ini handles sections, comments, and malformed lines") {
  std::istringstream good("[a]\nx = 1 # trailing comment\n\n[b]\ny=2\n");
  IniFile f = parse_ini(good);
  REQUIRE(f.sections.size() == 2);
  CHECK(*f.find("a")->find("x") == "1");
  CHECK(*f.find("b")->find("y") == "2");
  CHECK(f.find("c") == nullptr);
  CHECK(f.find("a")->find("z") == nullptr);

  std::istringstream orphan("x = 1\n");
  CHECK_THROWS_AS(parse_ini(orphan), ConfigError);
  std::istringstream unterminated("[a\n");
  CHECK_THROWS_AS(parse_ini(unterminated), ConfigError);
  std::istringstream noequals("[a]\njust words\n");
  CHECK_THROWS_AS(parse_ini(noequals), ConfigError);
}

TEST_CASE("run config parses every section") {
  RunSettings s = sample_settings();
  CHECK(s.truth_column == "true_id");
  REQUIRE(s.schema.size() == 2);
  CHECK(s.schema[0].name == "fn");
  CHECK(s.schema[0].kind == AttributeKind::String);
  CHECK(s.schema[0].s_cut == 7.0);
  CHECK(s.schema[1].kind == AttributeKind::Categorical);
  CHECK(s.generator.attributes[0].domain_size == 20);
  CHECK(s.generator.attributes[0].zipf == 0.5);
  CHECK(s.block_attributes == std::vector<std::string>{"fn"});
  CHECK(s.depth == 1);
  CHECK(s.variant == "pcg1");
  CHECK(s.iterations == 50);
  CHECK(s.thin == 5);
  CHECK(s.seed == 9);
  CHECK_FALSE(s.parallel);
  CHECK(s.out_dir == "out/sample");
  CHECK(s.has_generator);
  CHECK(s.generator.mode == LinkMode::Duplication);
  CHECK(s.generator.table_sizes == std::vector<int>{120});
  CHECK(s.generator_seed == 3);
  CHECK_FALSE(s.resolved());
}

TEST_CASE("auto hyperparameters expand against the corpus") {
  RunSettings s = sample_settings();
  Corpus corpus = load_settings_corpus(s);
  CHECK(corpus.records() == 120);
  s.resolve(corpus);
  CHECK(s.resolved());
  Hyperparameters h = s.hyperparameters(corpus.attributes());
  CHECK(h.entities == 120);
  CHECK(h.alpha[0] == doctest::Approx(120 * 0.1 * 0.01));
  CHECK(h.beta[0] == doctest::Approx(120 * 0.1));
}

TEST_CASE("resolved settings round-trip through write and parse") {
  RunSettings s = sample_settings();
  Corpus corpus = load_settings_corpus(s);
  s.resolve(corpus);
  std::ostringstream first;
  s.write(first);
  std::istringstream back(first.str());
  RunSettings reparsed = parse_run_config(parse_ini(back));
  CHECK(reparsed.resolved());
  std::ostringstream second;
  reparsed.write(second);
  CHECK(first.str() == second.str());
  Corpus again = load_settings_corpus(reparsed);
  CHECK(again.values == corpus.values);
  CHECK(again.ground_truth == corpus.ground_truth);
}

TEST_CASE("config validation errors") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_run_config(parse_ini(in));
  };
  CHECK_THROWS_AS(parse("[model]\nentities = 5\n"), ConfigError);  // no attributes
  CHECK_THROWS_AS(parse("[attributes]\nx = flavor\n[generator]\nrecords = 5\n"),
                  ConfigError);  // unknown kind
  const std::string base =
      "[attributes]\nx = categorical domain=4\n[generator]\nrecords = 10\n";
  CHECK_THROWS_AS(parse(base + "[sampler]\nvariant = mala\n"), ConfigError);
  CHECK_THROWS_AS(parse(base + "[sampler]\nthin = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse(base + "[blocking]\nattributes = y\ndepth = 1\n"),
                  ConfigError);  // unknown blocking attribute
  CHECK_THROWS_AS(parse(base + "[blocking]\ndepth = 2\n"), ConfigError);
  CHECK_THROWS_AS(
      parse(base + "[blocking]\nattributes = x\ndepth = 2\n[sampler]\nworkers = 3\n"),
      ConfigError);  // workers != 2^depth
  CHECK_THROWS_AS(parse("[attributes]\nx = categorical\n"), ConfigError);  // no data
  // workers == 2^depth passes
  CHECK(parse(base + "[blocking]\nattributes = x\ndepth = 2\n[sampler]\nworkers = 4\n")
            .workers == 4);
}
