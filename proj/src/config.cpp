#include "entlink/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace entlink {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, delim)) out.push_back(trim(item));
  if (!s.empty() && s.back() == delim) out.push_back("");
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

long parse_long(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer for " + what + ": '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid unsigned integer for " + what + ": '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for " + what + ": '" + s + "'");
  }
}

bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("invalid boolean for " + what + ": '" + s + "'");
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) out.push_back(parse_double(tok, what));
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

// Attribute value syntax: `<kind> [key=value ...]` with keys s_max, s_cut,
// domain, zipf.
void parse_attribute(const std::string& name, const std::string& value,
                     AttributeSchema& schema, GenAttribute& gen) {
  const auto tokens = split_ws(value);
  if (tokens.empty()) throw ConfigError("attribute " + name + ": missing kind");
  schema.name = name;
  gen.name = name;
  if (tokens[0] == "string") {
    schema.kind = AttributeKind::String;
    schema.s_cut = 7.0;
  } else if (tokens[0] == "categorical") {
    schema.kind = AttributeKind::Categorical;
    schema.s_cut = 0.0;
  } else {
    throw ConfigError("attribute " + name + ": unknown kind '" + tokens[0] + "'");
  }
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string::npos) {
      throw ConfigError("attribute " + name + ": expected key=value, got '" +
                        tokens[i] + "'");
    }
    const std::string key = tokens[i].substr(0, eq);
    const std::string val = tokens[i].substr(eq + 1);
    if (key == "s_max") {
      schema.s_max = parse_double(val, name + ".s_max");
    } else if (key == "s_cut") {
      schema.s_cut = parse_double(val, name + ".s_cut");
    } else if (key == "domain") {
      gen.domain_size = static_cast<int>(parse_long(val, name + ".domain"));
    } else if (key == "zipf") {
      gen.zipf = parse_double(val, name + ".zipf");
    } else {
      throw ConfigError("attribute " + name + ": unknown option '" + key + "'");
    }
  }
  gen.kind = schema.kind;
  gen.s_max = schema.s_max;
  gen.s_cut = schema.s_cut;
}

}  // namespace

const std::string* IniSection::find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

const IniSection* IniFile::find(const std::string& name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

IniFile parse_ini(std::istream& in) {
  IniFile file;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": unterminated section header");
      }
      file.sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    if (file.sections.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": entry before any [section]");
    }
    file.sections.back().entries.emplace_back(trim(line.substr(0, eq)),
                                              trim(line.substr(eq + 1)));
  }
  return file;
}

IniFile parse_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_ini(in);
}

RunSettings parse_run_config(const IniFile& ini) {
  RunSettings s;

  if (const IniSection* data = ini.find("data")) {
    if (const auto* v = data->find("files")) {
      for (auto& f : split(*v, ',')) {
        if (!f.empty()) s.files.push_back(f);
      }
    }
    if (const auto* v = data->find("delimiter")) {
      if (v->size() != 1) throw ConfigError("delimiter must be one character");
      s.delimiter = (*v)[0];
    }
    if (const auto* v = data->find("missing")) s.missing_token = *v;
    if (const auto* v = data->find("truth_column")) s.truth_column = *v;
  }

  const IniSection* attrs = ini.find("attributes");
  if (!attrs || attrs->entries.empty()) {
    throw ConfigError("config needs a non-empty [attributes] section");
  }
  for (const auto& [name, value] : attrs->entries) {
    AttributeSchema schema;
    GenAttribute gen;
    parse_attribute(name, value, schema, gen);
    s.schema.push_back(schema);
    s.generator.attributes.push_back(gen);
  }

  if (const IniSection* model = ini.find("model")) {
    if (const auto* v = model->find("entities")) s.entities = *v;
    if (const auto* v = model->find("alpha")) s.alpha = *v;
    if (const auto* v = model->find("beta")) s.beta = *v;
  }

  if (const IniSection* blocking = ini.find("blocking")) {
    if (const auto* v = blocking->find("attributes")) {
      for (auto& name : split(*v, ',')) {
        if (!name.empty()) s.block_attributes.push_back(name);
      }
    }
    if (const auto* v = blocking->find("depth")) {
      s.depth = static_cast<int>(parse_long(*v, "blocking.depth"));
    }
  }
  if (s.depth < 0 || s.depth > 20) throw ConfigError("blocking depth out of range");
  if (s.depth > 0 && s.block_attributes.empty()) {
    throw ConfigError("blocking depth > 0 requires blocking attributes");
  }
  for (const auto& name : s.block_attributes) {
    if (std::none_of(s.schema.begin(), s.schema.end(),
                     [&](const AttributeSchema& a) { return a.name == name; })) {
      throw ConfigError("blocking attribute '" + name + "' is not a data attribute");
    }
  }

  if (const IniSection* sampler = ini.find("sampler")) {
    if (const auto* v = sampler->find("variant")) s.variant = *v;
    if (const auto* v = sampler->find("iterations")) {
      s.iterations = parse_long(*v, "iterations");
    }
    if (const auto* v = sampler->find("thin")) {
      s.thin = static_cast<int>(parse_long(*v, "thin"));
    }
    if (const auto* v = sampler->find("checkpoint_interval")) {
      s.checkpoint_interval = parse_long(*v, "checkpoint_interval");
    }
    if (const auto* v = sampler->find("seed")) s.seed = parse_u64(*v, "seed");
    if (const auto* v = sampler->find("parallel")) {
      s.parallel = parse_bool(*v, "parallel");
    }
    if (const auto* v = sampler->find("workers")) {
      s.workers = static_cast<int>(parse_long(*v, "workers"));
    }
  }
  if (s.variant != "gibbs" && s.variant != "pcg1" && s.variant != "pcg2") {
    throw ConfigError("unknown sampler variant '" + s.variant + "'");
  }
  if (s.iterations < 0) throw ConfigError("iterations must be >= 0");
  if (s.thin <= 0) throw ConfigError("thin must be positive");
  if (s.workers != 0 && s.workers != (1 << s.depth)) {
    throw ConfigError("workers must equal 2^depth (" +
                      std::to_string(1 << s.depth) + ")");
  }

  if (const IniSection* output = ini.find("output")) {
    if (const auto* v = output->find("dir")) s.out_dir = *v;
  }

  if (const IniSection* gen = ini.find("generator")) {
    s.has_generator = true;
    if (const auto* v = gen->find("mode")) {
      if (*v == "model") {
        s.generator.mode = LinkMode::Model;
      } else if (*v == "duplication") {
        s.generator.mode = LinkMode::Duplication;
      } else {
        throw ConfigError("generator mode must be model|duplication");
      }
    }
    if (const auto* v = gen->find("records")) {
      s.generator.table_sizes.clear();
      for (auto& tok : split(*v, ',')) {
        s.generator.table_sizes.push_back(
            static_cast<int>(parse_long(tok, "generator.records")));
      }
    }
    if (const auto* v = gen->find("entities")) {
      s.generator.entities = static_cast<int>(parse_long(*v, "generator.entities"));
    }
    if (const auto* v = gen->find("duplicate_rate")) {
      s.generator.duplicate_rate = parse_double(*v, "generator.duplicate_rate");
    }
    if (const auto* v = gen->find("theta")) {
      s.generator.theta = parse_double_list(*v, "generator.theta");
    }
    if (const auto* v = gen->find("eta")) {
      s.generator.eta = parse_double_list(*v, "generator.eta");
    }
    if (const auto* v = gen->find("seed")) {
      s.generator_seed = parse_u64(*v, "generator.seed");
    }
  }

  if (s.files.empty() && !s.has_generator) {
    throw ConfigError("config needs [data] files or a [generator] section");
  }
  return s;
}

RunSettings load_run_config(const std::string& path) {
  return parse_run_config(parse_ini_file(path));
}

Corpus load_settings_corpus(const RunSettings& settings) {
  if (!settings.files.empty()) {
    LoadOptions opts;
    opts.delimiter = settings.delimiter;
    opts.missing_token = settings.missing_token;
    opts.truth_column = settings.truth_column;
    return load_corpus(settings.files, settings.schema, opts);
  }
  return generate_synthetic(settings.generator, settings.generator_seed);
}

void RunSettings::resolve(const Corpus& corpus) {
  const double records = static_cast<double>(corpus.records());
  if (entities == "auto") {
    entities = std::to_string(corpus.records());
  }
  if (alpha == "auto") {
    std::ostringstream oss;
    oss << records * 0.1 * 0.01;
    alpha = oss.str();
  }
  if (beta == "auto") {
    std::ostringstream oss;
    oss << records * 0.1;
    beta = oss.str();
  }
}

bool RunSettings::resolved() const {
  return entities != "auto" && alpha != "auto" && beta != "auto";
}

Hyperparameters RunSettings::hyperparameters(int attributes) const {
  if (!resolved()) throw ConfigError("settings not resolved against a corpus");
  Hyperparameters h;
  h.entities = static_cast<int>(parse_long(entities, "model.entities"));
  h.alpha.assign(static_cast<std::size_t>(attributes),
                 parse_double(alpha, "model.alpha"));
  h.beta.assign(static_cast<std::size_t>(attributes),
                parse_double(beta, "model.beta"));
  h.validate(attributes);
  return h;
}

void RunSettings::write(std::ostream& out) const {
  out << "[data]\n";
  if (!files.empty()) {
    out << "files = ";
    for (std::size_t i = 0; i < files.size(); ++i) {
      out << (i ? "," : "") << files[i];
    }
    out << "\n";
  }
  out << "delimiter = " << delimiter << "\n";
  if (!missing_token.empty()) out << "missing = " << missing_token << "\n";
  if (!truth_column.empty()) out << "truth_column = " << truth_column << "\n";

  out << "\n[attributes]\n";
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const AttributeSchema& a = schema[i];
    out << a.name << " = "
        << (a.kind == AttributeKind::String ? "string" : "categorical")
        << " s_max=" << a.s_max;
    if (a.kind == AttributeKind::String) out << " s_cut=" << a.s_cut;
    if (has_generator && i < generator.attributes.size()) {
      const GenAttribute& g = generator.attributes[i];
      out << " domain=" << g.domain_size;
      if (g.zipf != 0.0) out << " zipf=" << g.zipf;
    }
    out << "\n";
  }

  out << "\n[model]\n";
  out << "entities = " << entities << "\n";
  out << "alpha = " << alpha << "\n";
  out << "beta = " << beta << "\n";

  out << "\n[blocking]\n";
  if (!block_attributes.empty()) {
    out << "attributes = ";
    for (std::size_t i = 0; i < block_attributes.size(); ++i) {
      out << (i ? "," : "") << block_attributes[i];
    }
    out << "\n";
  }
  out << "depth = " << depth << "\n";

  out << "\n[sampler]\n";
  out << "variant = " << variant << "\n";
  out << "iterations = " << iterations << "\n";
  out << "thin = " << thin << "\n";
  out << "checkpoint_interval = " << checkpoint_interval << "\n";
  out << "seed = " << seed << "\n";
  out << "parallel = " << (parallel ? "true" : "false") << "\n";
  if (workers != 0) out << "workers = " << workers << "\n";

  out << "\n[output]\n";
  out << "dir = " << out_dir << "\n";

  if (has_generator) {
    out << "\n[generator]\n";
    out << "mode = "
        << (generator.mode == LinkMode::Model ? "model" : "duplication") << "\n";
    out << "records = ";
    for (std::size_t i = 0; i < generator.table_sizes.size(); ++i) {
      out << (i ? "," : "") << generator.table_sizes[i];
    }
    out << "\n";
    out << "entities = " << generator.entities << "\n";
    out << "duplicate_rate = " << generator.duplicate_rate << "\n";
    auto write_list = [&](const char* key, const std::vector<double>& v) {
      if (v.empty()) return;
      out << key << " = ";
      for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
      out << "\n";
    };
    write_list("theta", generator.theta);
    write_list("eta", generator.eta);
    out << "seed = " << generator_seed << "\n";
  }
}

}  // namespace entlink
