#include "entlink/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "entlink/alias.hpp"

namespace entlink {

ValueId Corpus::encode(int a, const std::string& s) {
  auto& index = dict_index[static_cast<std::size_t>(a)];
  auto it = index.find(s);
  if (it != index.end()) return it->second;
  auto& dict = dictionaries[static_cast<std::size_t>(a)];
  auto id = static_cast<ValueId>(dict.size());
  dict.push_back(s);
  index.emplace(s, id);
  return id;
}

void Corpus::validate() const {
  const int R = records();
  const int A = attributes();
  if (R == 0) throw DataError("corpus has no records");
  if (A == 0) throw DataError("corpus has no attributes");
  if (values.size() != static_cast<std::size_t>(R) * static_cast<std::size_t>(A)) {
    throw DataError("corpus value matrix has wrong shape");
  }
  int total = std::accumulate(table_sizes.begin(), table_sizes.end(), 0);
  if (total != R) throw DataError("table sizes do not sum to record count");
  for (int r = 0; r < R; ++r) {
    if (rec_table[static_cast<std::size_t>(r)] < 0 ||
        rec_table[static_cast<std::size_t>(r)] >= tables()) {
      throw DataError("record assigned to invalid table");
    }
    for (int a = 0; a < A; ++a) {
      ValueId v = value(r, a);
      if (v == kMissing) continue;
      if (v < 0 || static_cast<std::size_t>(v) >= dictionaries[static_cast<std::size_t>(a)].size()) {
        throw DataError("value id out of dictionary range");
      }
    }
  }
  for (int a = 0; a < A; ++a) {
    const auto& dict = dictionaries[static_cast<std::size_t>(a)];
    std::unordered_set<std::string> seen(dict.begin(), dict.end());
    if (seen.size() != dict.size()) {
      throw DataError("duplicate surface strings in dictionary for attribute " +
                      schema[static_cast<std::size_t>(a)].name);
    }
  }
  if (ground_truth && ground_truth->size() != static_cast<std::size_t>(R)) {
    throw DataError("ground-truth label count does not match record count");
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

}  // namespace

Corpus load_corpus(const std::vector<std::string>& paths,
                   const std::vector<AttributeSchema>& schema,
                   const LoadOptions& opts) {
  if (schema.empty()) throw ConfigError("schema has no attributes");
  Corpus corpus;
  corpus.schema = schema;
  const auto A = schema.size();
  corpus.dictionaries.resize(A);
  corpus.dict_index.resize(A);

  std::vector<int> truth;
  std::unordered_map<std::string, int> truth_ids;
  bool any_truth = false;

  for (std::size_t t = 0; t < paths.size(); ++t) {
    std::ifstream in(paths[t]);
    if (!in) throw DataError("cannot open data file: " + paths[t]);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty data file: " + paths[t]);
    strip_cr(line);
    auto header = split_line(line, opts.delimiter);

    std::vector<int> col_of(A, -1);
    int truth_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
      for (std::size_t a = 0; a < A; ++a) {
        if (header[c] == schema[a].name) col_of[a] = static_cast<int>(c);
      }
      if (!opts.truth_column.empty() && header[c] == opts.truth_column) {
        truth_col = static_cast<int>(c);
      }
    }
    for (std::size_t a = 0; a < A; ++a) {
      if (col_of[a] < 0) {
        throw DataError("file " + paths[t] + " is missing attribute column '" +
                        schema[a].name + "'");
      }
    }

    int rows = 0;
    while (std::getline(in, line)) {
      strip_cr(line);
      if (line.empty()) continue;
      auto fields = split_line(line, opts.delimiter);
      for (std::size_t a = 0; a < A; ++a) {
        const auto c = static_cast<std::size_t>(col_of[a]);
        std::string cell = c < fields.size() ? fields[c] : std::string();
        if (cell.empty() || cell == opts.missing_token) {
          corpus.values.push_back(kMissing);
        } else {
          corpus.values.push_back(corpus.encode(static_cast<int>(a), cell));
        }
      }
      corpus.rec_table.push_back(static_cast<int>(t));
      if (truth_col >= 0) {
        any_truth = true;
        const auto c = static_cast<std::size_t>(truth_col);
        std::string cell = c < fields.size() ? fields[c] : std::string();
        auto [it, inserted] =
            truth_ids.emplace(cell, static_cast<int>(truth_ids.size()));
        truth.push_back(it->second);
      } else {
        truth.push_back(-1);
      }
      ++rows;
    }
    corpus.table_sizes.push_back(rows);
  }

  if (corpus.rec_table.empty()) throw DataError("corpus has no records");
  if (any_truth) {
    for (int label : truth) {
      if (label < 0) throw DataError("ground-truth column missing in some tables");
    }
    corpus.ground_truth = std::move(truth);
  }
  corpus.validate();
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& path,
                  const LoadOptions& opts) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write data file: " + path);
  const int A = corpus.attributes();
  std::string truth_name = opts.truth_column.empty() ? "true_id" : opts.truth_column;
  for (int a = 0; a < A; ++a) {
    if (a > 0) out << opts.delimiter;
    out << corpus.schema[static_cast<std::size_t>(a)].name;
  }
  if (corpus.ground_truth) out << opts.delimiter << truth_name;
  out << '\n';
  for (int r = 0; r < corpus.records(); ++r) {
    for (int a = 0; a < A; ++a) {
      if (a > 0) out << opts.delimiter;
      ValueId v = corpus.value(r, a);
      out << (v == kMissing ? opts.missing_token : corpus.surface(a, v));
    }
    if (corpus.ground_truth) {
      out << opts.delimiter << (*corpus.ground_truth)[static_cast<std::size_t>(r)];
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for data file: " + path);
}

std::vector<double> empirical_distribution(const Corpus& corpus, int a) {
  const auto n = corpus.dictionaries[static_cast<std::size_t>(a)].size();
  std::vector<double> phi(n, 0.0);
  std::int64_t observed = 0;
  for (int r = 0; r < corpus.records(); ++r) {
    ValueId v = corpus.value(r, a);
    if (v == kMissing) continue;
    phi[static_cast<std::size_t>(v)] += 1.0;
    ++observed;
  }
  if (observed == 0) {
    throw DataError("attribute '" + corpus.schema[static_cast<std::size_t>(a)].name +
                    "' has no observed values");
  }
  for (double& p : phi) p /= static_cast<double>(observed);
  return phi;
}

Empirical empirical_distributions(const Corpus& corpus) {
  Empirical phi;
  phi.reserve(static_cast<std::size_t>(corpus.attributes()));
  for (int a = 0; a < corpus.attributes(); ++a) {
    phi.push_back(empirical_distribution(corpus, a));
  }
  return phi;
}

namespace {

std::string random_string(Rng& rng) {
  std::size_t len = 4 + rng.uniform_index(5);
  std::string s(len, 'a');
  for (char& ch : s) ch = static_cast<char>('a' + rng.uniform_index(26));
  return s;
}

std::string mutate_string(const std::string& base, Rng& rng) {
  std::string s = base;
  switch (rng.uniform_index(3)) {
    case 0: {  // substitute
      std::size_t i = rng.uniform_index(s.size());
      s[i] = static_cast<char>('a' + rng.uniform_index(26));
      break;
    }
    case 1: {  // insert
      std::size_t i = rng.uniform_index(s.size() + 1);
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(i),
               static_cast<char>('a' + rng.uniform_index(26)));
      break;
    }
    default: {  // delete
      if (s.size() > 1) s.erase(rng.uniform_index(s.size()), 1);
      break;
    }
  }
  return s;
}

std::vector<std::string> make_domain(const GenAttribute& attr, Rng& rng) {
  if (!attr.domain.empty()) return attr.domain;
  if (attr.domain_size <= 0) throw ConfigError("generator domain must be nonempty");
  std::vector<std::string> domain;
  std::unordered_set<std::string> seen;
  domain.reserve(static_cast<std::size_t>(attr.domain_size));
  while (domain.size() < static_cast<std::size_t>(attr.domain_size)) {
    std::string v;
    if (attr.kind == AttributeKind::Categorical) {
      v = attr.name + "_" + std::to_string(domain.size());
    } else if (!domain.empty() && rng.uniform() < 0.4) {
      // Mutations of earlier values give the domain realistic near-duplicate
      // neighbor structure.
      v = mutate_string(domain[rng.uniform_index(domain.size())], rng);
    } else {
      v = random_string(rng);
    }
    for (int tries = 0; seen.count(v) && tries < 100; ++tries) {
      v = random_string(rng);
    }
    if (seen.count(v)) throw RuntimeAbort("could not build a distinct string domain");
    seen.insert(v);
    domain.push_back(std::move(v));
  }
  return domain;
}

std::vector<double> make_weights(const GenAttribute& attr, std::size_t n) {
  std::vector<double> w;
  if (!attr.weights.empty()) {
    if (attr.weights.size() != n) {
      throw ConfigError("generator weights do not match domain size");
    }
    w = attr.weights;
  } else {
    w.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = attr.zipf == 0.0 ? 1.0 : std::pow(static_cast<double>(i + 1), -attr.zipf);
    }
  }
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw ConfigError("generator weights must have positive mass");
  for (double& x : w) x /= total;
  return w;
}

ValueId draw_pmf(const std::vector<double>& pmf, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t v = 0; v < pmf.size(); ++v) {
    acc += pmf[v];
    if (u < acc) return static_cast<ValueId>(v);
  }
  return static_cast<ValueId>(pmf.size() - 1);
}

}  // namespace

Corpus generate_synthetic(const GeneratorConfig& config, std::uint64_t seed) {
  if (config.attributes.empty()) throw ConfigError("generator needs attributes");
  if (config.table_sizes.empty()) throw ConfigError("generator needs table sizes");
  const auto A = config.attributes.size();
  const int R = std::accumulate(config.table_sizes.begin(),
                                config.table_sizes.end(), 0);
  if (R <= 0) throw ConfigError("generator needs a positive record count");

  Rng rng = Rng::keyed(seed, /*tag=*/0x67656eULL, 0);

  Corpus corpus;
  corpus.dictionaries.resize(A);
  corpus.dict_index.resize(A);
  Empirical phi(A);
  std::vector<SimilaritySpec> specs(A);
  for (std::size_t a = 0; a < A; ++a) {
    const GenAttribute& attr = config.attributes[a];
    AttributeSchema s;
    s.name = attr.name;
    s.kind = attr.kind;
    s.s_max = attr.s_max;
    s.s_cut = attr.kind == AttributeKind::String ? attr.s_cut : 0.0;
    corpus.schema.push_back(s);
    auto domain = make_domain(attr, rng);
    phi[a] = make_weights(attr, domain.size());
    for (auto& v : domain) corpus.encode(static_cast<int>(a), v);
    specs[a].constant = attr.kind == AttributeKind::Categorical;
    specs[a].s_max = s.s_max;
    specs[a].s_cut = s.s_cut;
  }
  SimilarityCache cache = SimilarityCache::build(corpus.dictionaries, phi, specs);

  std::vector<AliasTable> phi_alias;
  phi_alias.reserve(A);
  for (std::size_t a = 0; a < A; ++a) phi_alias.emplace_back(phi[a]);

  std::vector<double> theta(A, 0.0);
  std::vector<double> eta(A, 1.0);
  if (!config.theta.empty()) {
    if (config.theta.size() == 1) {
      theta.assign(A, config.theta[0]);
    } else if (config.theta.size() == A) {
      theta = config.theta;
    } else {
      throw ConfigError("generator theta must be scalar or per-attribute");
    }
  }
  if (!config.eta.empty()) {
    if (config.eta.size() == 1) {
      eta.assign(A, config.eta[0]);
    } else if (config.eta.size() == A) {
      eta = config.eta;
    } else {
      throw ConfigError("generator eta must be scalar or per-attribute");
    }
  }

  auto distort = [&](std::size_t a, ValueId y) {
    auto pmf = cache.distortion_pmf(static_cast<int>(a), y, phi);
    return draw_pmf(pmf, rng);
  };

  std::vector<int> truth;
  auto emit_record = [&](const std::vector<ValueId>& y, int label, bool distorted) {
    for (std::size_t a = 0; a < A; ++a) {
      ValueId x = y[a];
      if (distorted && rng.bernoulli(theta[a])) x = distort(a, y[a]);
      bool obs = rng.bernoulli(eta[a]);
      corpus.values.push_back(obs ? x : kMissing);
    }
    truth.push_back(label);
  };

  if (config.mode == LinkMode::Model) {
    const int E = config.entities;
    if (E <= 0) throw ConfigError("generator needs a positive entity count");
    std::vector<std::vector<ValueId>> Y(static_cast<std::size_t>(E),
                                        std::vector<ValueId>(A));
    for (auto& row : Y) {
      for (std::size_t a = 0; a < A; ++a) {
        row[a] = static_cast<ValueId>(phi_alias[a].draw(rng));
      }
    }
    for (std::size_t t = 0; t < config.table_sizes.size(); ++t) {
      for (int r = 0; r < config.table_sizes[t]; ++r) {
        auto e = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(E)));
        emit_record(Y[static_cast<std::size_t>(e)], e, /*distorted=*/true);
        corpus.rec_table.push_back(static_cast<int>(t));
      }
    }
    corpus.table_sizes = config.table_sizes;
  } else {
    if (config.table_sizes.size() != 1) {
      throw ConfigError("duplication mode generates a single table");
    }
    const int D = static_cast<int>(
        std::lround(config.duplicate_rate * static_cast<double>(R)));
    const int E_true = R - D;
    if (E_true <= 0 || D < 0) throw ConfigError("duplicate rate out of range");

    // Distinct entities where possible so duplicates are the only true links.
    std::vector<std::vector<ValueId>> Y;
    std::unordered_set<std::string> keys;
    Y.reserve(static_cast<std::size_t>(E_true));
    for (int e = 0; e < E_true; ++e) {
      std::vector<ValueId> row(A);
      std::string key;
      for (int tries = 0; tries < 1000; ++tries) {
        key.clear();
        for (std::size_t a = 0; a < A; ++a) {
          row[a] = static_cast<ValueId>(phi_alias[a].draw(rng));
          key += std::to_string(row[a]);
          key += ':';
        }
        if (!keys.count(key)) break;
      }
      keys.insert(key);
      Y.push_back(row);
    }

    // Pick D entities to duplicate via partial Fisher-Yates.
    std::vector<int> order(static_cast<std::size_t>(E_true));
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < D; ++i) {
      auto j = i + static_cast<int>(rng.uniform_index(
                       static_cast<std::size_t>(E_true - i)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    for (int e = 0; e < E_true; ++e) {
      emit_record(Y[static_cast<std::size_t>(e)], e, /*distorted=*/false);
    }
    for (int i = 0; i < D; ++i) {
      int e = order[static_cast<std::size_t>(i)];
      emit_record(Y[static_cast<std::size_t>(e)], e, /*distorted=*/true);
    }
    corpus.rec_table.assign(static_cast<std::size_t>(R), 0);
    corpus.table_sizes = {R};

    // Shuffle record order so duplicates are interleaved.
    std::vector<int> perm(static_cast<std::size_t>(R));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = R - 1; i > 0; --i) {
      auto j = rng.uniform_index(static_cast<std::size_t>(i + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
    }
    std::vector<ValueId> shuffled(corpus.values.size());
    std::vector<int> shuffled_truth(truth.size());
    for (int r = 0; r < R; ++r) {
      int src = perm[static_cast<std::size_t>(r)];
      for (std::size_t a = 0; a < A; ++a) {
        shuffled[static_cast<std::size_t>(r) * A + a] =
            corpus.values[static_cast<std::size_t>(src) * A + a];
      }
      shuffled_truth[static_cast<std::size_t>(r)] =
          truth[static_cast<std::size_t>(src)];
    }
    corpus.values = std::move(shuffled);
    truth = std::move(shuffled_truth);
  }

  corpus.ground_truth = std::move(truth);
  corpus.validate();
  return corpus;
}

}  // namespace entlink
