#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "entlink/corpus.hpp"
#include "entlink/model.hpp"

namespace entlink {

/// Parsed key-value config with ordered sections. Syntax: `[section]`
/// headers, `key = value` entries, `#` comments, blank lines ignored.
struct IniSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(const std::string& key) const;
};

struct IniFile {
  std::vector<IniSection> sections;

  const IniSection* find(const std::string& name) const;
};

IniFile parse_ini(std::istream& in);
IniFile parse_ini_file(const std::string& path);

/// Everything needed to reproduce a run. Fields holding "auto" are expanded
/// against the corpus by resolve(); a resolved settings object round-trips
/// through write()/load_run_config() bit-exactly.
struct RunSettings {
  // [data] — either delimited files or an inline [generator] section.
  std::vector<std::string> files;
  char delimiter = ',';
  std::string missing_token;
  std::string truth_column;
  std::vector<AttributeSchema> schema;  // [attributes]

  // [model]
  std::string entities = "auto";
  std::string alpha = "auto";
  std::string beta = "auto";

  // [blocking]
  std::vector<std::string> block_attributes;
  int depth = 0;

  // [sampler]
  std::string variant = "pcg1";
  long iterations = 100;
  int thin = 10;
  long checkpoint_interval = 0;
  std::uint64_t seed = 0;
  bool parallel = true;
  int workers = 0;  // 0 = one per block; otherwise must equal 2^depth

  // [output]
  std::string out_dir = "out";

  // [generator] (optional synthetic data source)
  bool has_generator = false;
  GeneratorConfig generator;
  std::uint64_t generator_seed = 0;

  /// Expands every "auto" field against the corpus (Appendix-style
  /// defaults: E = R, alpha = 0.001 R, beta = 0.1 R).
  void resolve(const Corpus& corpus);
  bool resolved() const;
  Hyperparameters hyperparameters(int attributes) const;

  void write(std::ostream& out) const;
};

RunSettings load_run_config(const std::string& path);
RunSettings parse_run_config(const IniFile& ini);

/// Loads the corpus named by the settings: delimited files when given,
/// otherwise the inline generator.
Corpus load_settings_corpus(const RunSettings& settings);

}  // namespace entlink
