#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "entlink/common.hpp"
#include "entlink/rng.hpp"
#include "entlink/similarity.hpp"

namespace entlink {

enum class AttributeKind { Categorical, String };

struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::Categorical;
  double s_max = 10.0;
  double s_cut = 0.0;  // only meaningful for string attributes
};

/// Immutable record collection: T tables, aligned attributes, values
/// dictionary-encoded per attribute. Missing cells hold kMissing.
class Corpus {
 public:
  std::vector<AttributeSchema> schema;
  std::vector<int> table_sizes;       // R_t per table
  std::vector<int> rec_table;         // record -> table index
  std::vector<ValueId> values;        // R x A, row-major; kMissing if unobserved
  std::vector<std::vector<std::string>> dictionaries;  // per attribute
  std::vector<std::unordered_map<std::string, ValueId>> dict_index;
  std::optional<std::vector<int>> ground_truth;  // record -> true entity label

  int records() const { return static_cast<int>(rec_table.size()); }
  int attributes() const { return static_cast<int>(schema.size()); }
  int tables() const { return static_cast<int>(table_sizes.size()); }

  ValueId value(int r, int a) const {
    return values[static_cast<std::size_t>(r) * schema.size() +
                  static_cast<std::size_t>(a)];
  }
  bool observed(int r, int a) const { return value(r, a) != kMissing; }

  const std::string& surface(int a, ValueId v) const {
    return dictionaries[static_cast<std::size_t>(a)][static_cast<std::size_t>(v)];
  }

  /// Dictionary id for a surface string, inserting it if new.
  ValueId encode(int a, const std::string& s);

  /// Checks the structural invariants; throws DataError on violation.
  void validate() const;
};

struct LoadOptions {
  char delimiter = ',';
  std::string missing_token;  // cells equal to this (or empty) are missing
  std::string truth_column;   // optional ground-truth column, never an attribute
};

/// Reads one delimited file per table. Header row required; columns are
/// matched to schema attribute names (extra columns ignored except the
/// optional truth column).
Corpus load_corpus(const std::vector<std::string>& paths,
                   const std::vector<AttributeSchema>& schema,
                   const LoadOptions& opts = {});

/// Writes the corpus as a single delimited file (one table) including the
/// truth column when ground truth is present.
void write_corpus(const Corpus& corpus, const std::string& path,
                  const LoadOptions& opts = {});

/// phi_a(v) = #{observed cells with value v} / #{observed cells}, attribute a.
std::vector<double> empirical_distribution(const Corpus& corpus, int a);

/// All attributes at once.
Empirical empirical_distributions(const Corpus& corpus);

enum class LinkMode {
  Model,        // forward-sample the generative process
  Duplication,  // unique entities plus a distorted duplicate for a fraction
};

struct GenAttribute {
  std::string name;
  AttributeKind kind = AttributeKind::Categorical;
  int domain_size = 10;
  double zipf = 0.0;  // weight of value i proportional to (i+1)^-zipf; 0 = uniform
  double s_max = 10.0;
  double s_cut = 7.0;                // string attributes only
  std::vector<std::string> domain;   // optional explicit domain
  std::vector<double> weights;       // optional explicit phi (unnormalized ok)
};

struct GeneratorConfig {
  std::vector<GenAttribute> attributes;
  std::vector<int> table_sizes{100};
  int entities = 100;              // E (Model mode)
  std::vector<double> theta;       // per attribute, broadcast over tables
  std::vector<double> eta;         // per attribute observation probability
  LinkMode mode = LinkMode::Model;
  double duplicate_rate = 0.1;     // Duplication mode: fraction of records
                                   // that are distorted duplicates
};

/// Reproducible synthetic corpus; ground_truth holds the sampled entity
/// labels. Duplication mode produces a single table of table_sizes[0]
/// records with round(rate * R) duplicated entities.
Corpus generate_synthetic(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace entlink
