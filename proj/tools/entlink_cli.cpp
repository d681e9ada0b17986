#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "entlink/blocking.hpp"
#include "entlink/config.hpp"
#include "entlink/diagnostics.hpp"
#include "entlink/kernels.hpp"
#include "entlink/linkage.hpp"
#include "entlink/runtime.hpp"

namespace fs = std::filesystem;
using namespace entlink;

namespace {

std::vector<int> blocking_attribute_ids(const RunSettings& settings) {
  std::vector<int> ids;
  for (const auto& name : settings.block_attributes) {
    for (std::size_t a = 0; a < settings.schema.size(); ++a) {
      if (settings.schema[a].name == name) {
        ids.push_back(static_cast<int>(a));
        break;
      }
    }
  }
  return ids;
}

struct Pipeline {
  Corpus corpus;
  RunSettings settings;
  Empirical phi;
  SimilarityCache cache;
  Hyperparameters hyper;
  BlockingTree tree;
  BaseTables base;
};

Pipeline build_pipeline(const std::string& config_path) {
  Pipeline p;
  p.settings = load_run_config(config_path);
  p.corpus = load_settings_corpus(p.settings);
  p.settings.resolve(p.corpus);
  p.phi = empirical_distributions(p.corpus);
  p.cache = SimilarityCache::build(p.corpus, p.phi);
  p.hyper = p.settings.hyperparameters(p.corpus.attributes());
  p.tree = fit_tree(p.corpus, blocking_attribute_ids(p.settings), p.settings.depth);
  p.base = BaseTables::build(p.cache, p.phi);
  return p;
}

int cmd_generate(const std::string& config_path, const std::string& output) {
  RunSettings settings = load_run_config(config_path);
  if (!settings.has_generator) {
    throw ConfigError("generate: config has no [generator] section");
  }
  Corpus corpus = generate_synthetic(settings.generator, settings.generator_seed);
  LoadOptions opts;
  opts.delimiter = settings.delimiter;
  opts.missing_token = settings.missing_token;
  opts.truth_column =
      settings.truth_column.empty() ? "true_id" : settings.truth_column;
  write_corpus(corpus, output, opts);
  std::cout << "wrote " << corpus.records() << " records, " << corpus.attributes()
            << " attributes to " << output << "\n";
  return 0;
}

int cmd_ingest(const std::string& config_path) {
  RunSettings settings = load_run_config(config_path);
  Corpus corpus = load_settings_corpus(settings);
  corpus.validate();
  long missing = 0;
  for (int r = 0; r < corpus.records(); ++r) {
    for (int a = 0; a < corpus.attributes(); ++a) {
      missing += corpus.observed(r, a) ? 0 : 1;
    }
  }
  std::cout << "records: " << corpus.records() << "\n"
            << "tables: " << corpus.tables() << "\n"
            << "attributes: " << corpus.attributes() << "\n";
  for (int a = 0; a < corpus.attributes(); ++a) {
    std::cout << "  " << corpus.schema[static_cast<std::size_t>(a)].name
              << ": " << corpus.dictionaries[static_cast<std::size_t>(a)].size()
              << " distinct values\n";
  }
  std::cout << "missing cells: " << missing << "\n"
            << "ground truth: " << (corpus.ground_truth ? "present" : "absent")
            << "\n";
  return 0;
}

int cmd_fit_blocks(const std::string& config_path, const std::string& output) {
  Pipeline p = build_pipeline(config_path);
  ModelState state =
      init_state(p.corpus, p.hyper, p.tree, p.phi, p.settings.seed);
  std::vector<int> sizes(static_cast<std::size_t>(p.tree.blocks()), 0);
  for (int e = 0; e < state.E; ++e) {
    ++sizes[static_cast<std::size_t>(p.tree.assign(
        &state.Y[static_cast<std::size_t>(e) *
                 static_cast<std::size_t>(state.A)]))];
  }
  std::cout << "blocks: " << p.tree.blocks() << "\n";
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    std::cout << "  block " << b << ": " << sizes[b] << " entities\n";
  }
  const auto deviations = balance_report(sizes);
  std::cout << "max relative deviation: "
            << *std::max_element(deviations.begin(), deviations.end()) << "\n";
  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) throw DataError("cannot write tree file " + output);
    p.tree.serialize(out);
    std::cout << "wrote tree to " << output << "\n";
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& resume,
            int workers_override) {
  Pipeline p = build_pipeline(config_path);
  if (workers_override != 0 && workers_override != p.tree.blocks()) {
    throw ConfigError("--workers must equal 2^depth = " +
                      std::to_string(p.tree.blocks()));
  }
  Engine engine(p.corpus, p.hyper, p.tree, p.cache, p.phi, p.base,
                sampler_from_string(p.settings.variant), p.settings.seed,
                p.settings.parallel);
  std::string out_dir = p.settings.out_dir;
  if (!resume.empty()) {
    out_dir = resume;
    std::ifstream in(fs::path(resume) / "state.bin", std::ios::binary);
    if (!in) throw DataError("no checkpoint under " + resume);
    engine.load(in);
    std::cout << "resumed at iteration " << engine.iteration() << "\n";
  }
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "config.resolved");
    if (!out) throw DataError("cannot write config.resolved in " + out_dir);
    RunSettings resolved = p.settings;
    resolved.out_dir = out_dir;
    resolved.write(out);
  }
  RunOptions options;
  options.iterations = p.settings.iterations;
  options.thin = p.settings.thin;
  options.checkpoint_interval = p.settings.checkpoint_interval;
  options.out_dir = out_dir;
  run_engine(engine, options);
  std::cout << "finished at iteration " << engine.iteration() << "; outputs in "
            << out_dir << "\n";
  return 0;
}

std::vector<std::vector<double>> read_csv_columns(const std::string& path,
                                                  std::vector<std::string>& names) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  names.clear();
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  std::vector<std::vector<double>> columns(names.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t i = 0;
    while (std::getline(ss, cell, ',') && i < columns.size()) {
      columns[i++].push_back(std::stod(cell));
    }
    if (i != columns.size()) throw DataError(path + ": ragged row");
  }
  return columns;
}

int cmd_summarize(const std::string& trace_path, const std::string& timing_path,
                  long burnin, const std::string& acf_path) {
  std::vector<std::string> names;
  auto columns = read_csv_columns(trace_path, names);
  if (columns.empty() || names.front() != "iteration") {
    throw DataError("trace file lacks an iteration column");
  }
  const auto& iterations = columns.front();
  std::size_t first = 0;
  while (first < iterations.size() && iterations[first] <= static_cast<double>(burnin)) {
    ++first;
  }
  if (iterations.size() - first < 10) {
    throw DataError("fewer than 10 trace rows after burn-in");
  }

  double seconds = 0.0;
  if (!timing_path.empty() && fs::exists(timing_path)) {
    std::vector<std::string> tnames;
    auto tcols = read_csv_columns(timing_path, tnames);
    if (tcols.size() >= 2) {
      for (std::size_t i = 0; i < tcols[0].size(); ++i) {
        if (tcols[0][i] > static_cast<double>(burnin)) seconds += tcols[1][i];
      }
    }
  }

  std::ofstream acf_out;
  if (!acf_path.empty()) {
    acf_out.open(acf_path);
    if (!acf_out) throw DataError("cannot write " + acf_path);
    acf_out << "statistic,lag,autocorrelation\n";
  }

  std::cout << "statistic,ess,ess_per_sample";
  if (seconds > 0.0) std::cout << ",ess_rate";
  std::cout << "\n";
  for (std::size_t c = 1; c < columns.size(); ++c) {
    std::vector<double> series(columns[c].begin() + static_cast<long>(first),
                               columns[c].end());
    EssResult r = ess(series);
    std::cout << names[c] << ',' << r.ess << ','
              << r.ess / static_cast<double>(series.size());
    if (seconds > 0.0) std::cout << ',' << r.ess / seconds;
    if (r.degenerate) std::cout << ",degenerate";
    std::cout << "\n";
    if (acf_out.is_open() && !r.degenerate) {
      auto acf = autocorrelation(
          series, static_cast<int>(std::min<std::size_t>(50, series.size() - 1)));
      for (std::size_t lag = 0; lag < acf.size(); ++lag) {
        acf_out << names[c] << ',' << lag << ',' << acf[lag] << "\n";
      }
    }
  }
  return 0;
}

int cmd_estimate(const std::string& run_dir, long burnin, int thin,
                 const std::string& output) {
  const fs::path dir = fs::path(run_dir) / "linkage";
  if (!fs::is_directory(dir)) throw DataError("no linkage directory under " + run_dir);
  std::map<long, fs::path> snapshots_by_iter;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("iter-", 0) != 0) continue;
    snapshots_by_iter[std::stol(name.substr(5))] = entry.path();
  }
  std::vector<std::vector<int>> snapshots;
  long kept = 0;
  for (const auto& [iter, path] : snapshots_by_iter) {
    if (iter <= burnin) continue;
    if (kept++ % thin != 0) continue;
    snapshots.push_back(read_linkage_snapshot(path.string()));
  }
  if (snapshots.empty()) throw DataError("no snapshots left after burn-in");
  Clustering clusters = smpmms(snapshots);
  std::ofstream out(output);
  if (!out) throw DataError("cannot write " + output);
  out << "record,cluster\n";
  for (int r = 0; r < clusters.records(); ++r) {
    out << r << ',' << clusters.assignment[static_cast<std::size_t>(r)] << "\n";
  }
  std::cout << "used " << snapshots.size() << " snapshots; "
            << clusters.clusters() << " clusters written to " << output << "\n";
  return 0;
}

int cmd_evaluate(const std::string& clusters_path, const std::string& config_path) {
  RunSettings settings = load_run_config(config_path);
  Corpus corpus = load_settings_corpus(settings);
  if (!corpus.ground_truth) throw DataError("corpus has no ground-truth labels");

  std::ifstream in(clusters_path);
  if (!in) throw DataError("cannot open " + clusters_path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<int> assignment(static_cast<std::size_t>(corpus.records()), -1);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("bad clusters row: " + line);
    const long r = std::stol(line.substr(0, comma));
    if (r < 0 || r >= corpus.records()) throw DataError("record id out of range");
    assignment[static_cast<std::size_t>(r)] =
        static_cast<int>(std::stol(line.substr(comma + 1)));
  }
  for (int c : assignment) {
    if (c < 0) throw DataError("clusters file does not cover every record");
  }
  Metrics m = evaluate(clustering_from_labels(assignment), *corpus.ground_truth);
  std::cout << "precision = " << m.precision << "\n"
            << "recall = " << m.recall << "\n"
            << "f1 = " << m.f1 << "\n"
            << "ari = " << m.ari << "\n"
            << "cluster_count_error_pct = " << m.cluster_count_error << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scalable Bayesian entity resolution with joint blocking"};
  app.require_subcommand(1);

  std::string config_path, output, resume, run_dir, trace_path, timing_path;
  std::string acf_path, clusters_path;
  long burnin = 0;
  int thin = 1;
  int workers = 0;

  auto* generate = app.add_subcommand("generate", "write a synthetic corpus");
  generate->add_option("--config", config_path)->required();
  generate->add_option("--output", output)->required();

  auto* ingest = app.add_subcommand("ingest", "load and validate a corpus");
  ingest->add_option("--config", config_path)->required();

  auto* fit = app.add_subcommand("fit-blocks", "fit the blocking tree");
  fit->add_option("--config", config_path)->required();
  fit->add_option("--output", output);

  auto* run = app.add_subcommand("run", "run the sampler");
  run->add_option("--config", config_path)->required();
  run->add_option("--resume", resume);
  run->add_option("--workers", workers);

  auto* summarize = app.add_subcommand("summarize", "trace diagnostics");
  summarize->add_option("--trace", trace_path)->required();
  summarize->add_option("--timing", timing_path);
  summarize->add_option("--burnin", burnin);
  summarize->add_option("--acf", acf_path);

  auto* estimate = app.add_subcommand("estimate", "point estimate via sMPMMS");
  estimate->add_option("--run-dir", run_dir)->required();
  estimate->add_option("--burnin", burnin);
  estimate->add_option("--thin", thin);
  estimate->add_option("--output", output)->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score clusters vs truth");
  evaluate_cmd->add_option("--clusters", clusters_path)->required();
  evaluate_cmd->add_option("--config", config_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(config_path, output);
    if (ingest->parsed()) return cmd_ingest(config_path);
    if (fit->parsed()) return cmd_fit_blocks(config_path, output);
    if (run->parsed()) return cmd_run(config_path, resume, workers);
    if (summarize->parsed()) {
      return cmd_summarize(trace_path, timing_path, burnin, acf_path);
    }
    if (estimate->parsed()) return cmd_estimate(run_dir, burnin, thin, output);
    if (evaluate_cmd->parsed()) return cmd_evaluate(clusters_path, config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const RuntimeAbort& e) {
    std::cerr << "runtime abort: " << e.what() << "\n";
    return 4;
  }
  return 1;
}
