#include "entlink/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "entlink/diagnostics.hpp"

namespace entlink {

namespace {

constexpr std::uint64_t kWorkerTag = 0x776f726bULL;   // per-block streams
constexpr std::uint64_t kManagerTag = 0x6d616e61ULL;  // Theta stream

void insert_sorted(std::vector<int>& v, int x) {
  v.insert(std::lower_bound(v.begin(), v.end(), x), x);
}

void erase_sorted(std::vector<int>& v, int x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) {
    throw RuntimeAbort("runtime: element missing from sorted list");
  }
  v.erase(it);
}

}  // namespace

Sampler sampler_from_string(const std::string& name) {
  if (name == "gibbs") return Sampler::Gibbs;
  if (name == "pcg1") return Sampler::Pcg1;
  if (name == "pcg2") return Sampler::Pcg2;
  throw ConfigError("unknown sampler '" + name + "' (expected gibbs|pcg1|pcg2)");
}

std::string to_string(Sampler sampler) {
  switch (sampler) {
    case Sampler::Gibbs: return "gibbs";
    case Sampler::Pcg1: return "pcg1";
    case Sampler::Pcg2: return "pcg2";
  }
  throw ConfigError("invalid sampler enum");
}

std::vector<long> aggregate_z_counts(const std::vector<std::vector<long>>& partials) {
  if (partials.empty()) return {};
  std::vector<long> total(partials.front().size(), 0);
  for (const auto& part : partials) {
    if (part.size() != total.size()) {
      throw RuntimeAbort("aggregate_z_counts: ragged partial count matrices");
    }
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += part[i];
  }
  return total;
}

// ---------------------------------------------------------------------------
// Worker pool: long-lived threads, one per block, released by a generation
// barrier each iteration. All sampling state touched by run_block is
// block-local, so scheduling cannot affect the draws.

struct Engine::Pool {
  std::vector<std::thread> threads;
  std::mutex mutex;
  std::condition_variable start_cv;
  std::condition_variable done_cv;
  long generation = 0;
  int pending = 0;
  bool stop = false;
  std::exception_ptr error;
};

Engine::Engine(const Corpus& corpus, const Hyperparameters& hyper,
               const BlockingTree& tree, const SimilarityCache& cache,
               const Empirical& phi, const BaseTables& base, Sampler sampler,
               std::uint64_t seed, bool parallel)
    : corpus_(&corpus),
      hyper_(&hyper),
      tree_(&tree),
      cache_(&cache),
      phi_(&phi),
      base_(&base),
      sampler_(sampler),
      parallel_(parallel),
      state_(init_state(corpus, hyper, tree, phi, seed)),
      manager_rng_(Rng::keyed(seed, kManagerTag, 0)) {
  const int blocks = tree.blocks();
  block_rng_.reserve(static_cast<std::size_t>(blocks));
  for (int b = 0; b < blocks; ++b) {
    block_rng_.push_back(Rng::keyed(seed, kWorkerTag, static_cast<std::uint64_t>(b)));
  }
  rebuild_derived();

  if (parallel_ && blocks > 1) {
    pool_ = std::make_unique<Pool>();
    pool_->threads.reserve(static_cast<std::size_t>(blocks));
    for (int b = 0; b < blocks; ++b) {
      pool_->threads.emplace_back([this, b] {
        long seen = 0;
        for (;;) {
          {
            std::unique_lock lock(pool_->mutex);
            pool_->start_cv.wait(lock, [&] {
              return pool_->stop || pool_->generation > seen;
            });
            if (pool_->stop) return;
            seen = pool_->generation;
          }
          try {
            run_block(b);
          } catch (...) {
            std::lock_guard lock(pool_->mutex);
            if (!pool_->error) pool_->error = std::current_exception();
          }
          std::lock_guard lock(pool_->mutex);
          if (--pool_->pending == 0) pool_->done_cv.notify_all();
        }
      });
    }
  }
}

Engine::~Engine() {
  if (pool_) {
    {
      std::lock_guard lock(pool_->mutex);
      pool_->stop = true;
    }
    pool_->start_cv.notify_all();
    for (auto& t : pool_->threads) t.join();
  }
}

void Engine::rebuild_derived() {
  const int blocks = tree_->blocks();
  entities_.assign(static_cast<std::size_t>(blocks), {});
  for (int e = 0; e < state_.E; ++e) {
    int b = tree_->assign(&state_.Y[static_cast<std::size_t>(e) *
                                    static_cast<std::size_t>(state_.A)]);
    entities_[static_cast<std::size_t>(b)].push_back(e);
  }
  records_.assign(static_cast<std::size_t>(blocks), {});
  entity_records_.assign(static_cast<std::size_t>(state_.E), {});
  for (int r = 0; r < state_.R; ++r) {
    records_[static_cast<std::size_t>(state_.gamma[static_cast<std::size_t>(r)])]
        .push_back(r);
    entity_records_[static_cast<std::size_t>(
                        state_.lambda[static_cast<std::size_t>(r)])]
        .push_back(r);
  }
  index_.assign(static_cast<std::size_t>(blocks), InvertedIndex(state_.A));
  z_partial_.assign(static_cast<std::size_t>(blocks), {});
  outbox_.assign(static_cast<std::size_t>(blocks), {});
  for (int b = 0; b < blocks; ++b) {
    index_[static_cast<std::size_t>(b)].rebuild(state_,
                                                entities_[static_cast<std::size_t>(b)]);
    refresh_partials(b);
  }
}

void Engine::refresh_partials(int b) {
  auto& part = z_partial_[static_cast<std::size_t>(b)];
  part.assign(static_cast<std::size_t>(state_.T) * static_cast<std::size_t>(state_.A),
              0);
  for (int r : records_[static_cast<std::size_t>(b)]) {
    const std::size_t t =
        static_cast<std::size_t>(corpus_->rec_table[static_cast<std::size_t>(r)]);
    for (int a = 0; a < state_.A; ++a) {
      part[t * static_cast<std::size_t>(state_.A) + static_cast<std::size_t>(a)] +=
          state_.z(r, a);
    }
  }
}

void Engine::phase_theta() {
  std::vector<long> counts = aggregate_z_counts(z_partial_);
  for (int t = 0; t < state_.T; ++t) {
    const long cells = corpus_->table_sizes[static_cast<std::size_t>(t)];
    for (int a = 0; a < state_.A; ++a) {
      const long z_sum =
          counts[static_cast<std::size_t>(t) * static_cast<std::size_t>(state_.A) +
                 static_cast<std::size_t>(a)];
      state_.th(t, a) =
          update_theta(z_sum, cells, hyper_->alpha[static_cast<std::size_t>(a)],
                       hyper_->beta[static_cast<std::size_t>(a)], manager_rng_);
    }
  }
}

void Engine::run_block(int b) {
  const KernelContext ctx{corpus_, cache_, phi_, hyper_, tree_, base_};
  Rng& rng = block_rng_[static_cast<std::size_t>(b)];
  auto& block_entities = entities_[static_cast<std::size_t>(b)];
  auto& block_records = records_[static_cast<std::size_t>(b)];
  InvertedIndex& index = index_[static_cast<std::size_t>(b)];
  const bool condition_on_z = sampler_ == Sampler::Gibbs;

  // Link updates.
  for (int r : block_records) {
    const int old_e = state_.lambda[static_cast<std::size_t>(r)];
    const int new_e =
        sampler_ == Sampler::Pcg2
            ? update_lambda_pcg2(state_, ctx, block_entities, r, rng)
            : update_lambda_gibbs(state_, ctx, index, block_entities, r, rng);
    if (new_e != old_e) {
      erase_sorted(entity_records_[static_cast<std::size_t>(old_e)], r);
      insert_sorted(entity_records_[static_cast<std::size_t>(new_e)], r);
    }
  }

  // Joint entity/block updates (plus linked-record distortion indicators in
  // the marginalized variants). Entities that land in another block are
  // queued for the iteration-boundary shuffle.
  auto& outbox = outbox_[static_cast<std::size_t>(b)];
  for (int e : block_entities) {
    const int nb = update_entity_joint(state_, ctx, e,
                                       entity_records_[static_cast<std::size_t>(e)],
                                       condition_on_z, &index, rng);
    if (nb != b) {
      outbox.push_back({b, nb, e, entity_records_[static_cast<std::size_t>(e)]});
    }
  }

  // Remaining distortion indicators: the z-conditioned variant redraws every
  // cell here; the marginalized variants already redrew them above.
  if (condition_on_z) {
    for (int r : block_records) {
      for (int a = 0; a < state_.A; ++a) {
        state_.z(r, a) = draw_z_cell(state_, ctx, r, a, rng);
      }
    }
  }

  refresh_partials(b);
}

void Engine::parallel_sweep() {
  {
    std::lock_guard lock(pool_->mutex);
    pool_->pending = blocks();
    ++pool_->generation;
  }
  pool_->start_cv.notify_all();
  std::unique_lock lock(pool_->mutex);
  pool_->done_cv.wait(lock, [&] { return pool_->pending == 0; });
  if (pool_->error) {
    std::exception_ptr err = pool_->error;
    pool_->error = nullptr;
    std::rethrow_exception(err);
  }
}

void Engine::apply_shuffle() {
  last_shuffle_.clear();
  std::vector<char> touched(static_cast<std::size_t>(blocks()), 0);
  for (auto& outbox : outbox_) {
    for (ShuffleEnvelope& env : outbox) {
      const int e = env.entity;
      const int dst = env.destination;
      if (tree_->assign(&state_.Y[static_cast<std::size_t>(e) *
                                  static_cast<std::size_t>(state_.A)]) != dst) {
        throw RuntimeAbort("shuffle: destination disagrees with the blocking tree");
      }
      erase_sorted(entities_[static_cast<std::size_t>(env.source)], e);
      insert_sorted(entities_[static_cast<std::size_t>(dst)], e);
      index_[static_cast<std::size_t>(env.source)].erase_entity(state_, e);
      index_[static_cast<std::size_t>(dst)].insert_entity(state_, e);
      for (int r : env.records) {
        erase_sorted(records_[static_cast<std::size_t>(env.source)], r);
        insert_sorted(records_[static_cast<std::size_t>(dst)], r);
        if (state_.gamma[static_cast<std::size_t>(r)] != dst) {
          throw RuntimeAbort("shuffle: record block label out of date");
        }
      }
      touched[static_cast<std::size_t>(env.source)] = 1;
      touched[static_cast<std::size_t>(dst)] = 1;
      last_shuffle_.push_back(std::move(env));
    }
    outbox.clear();
  }
  // Shuffled records changed hands after the partial counts were taken;
  // recount the affected blocks so each partial matches its block exactly.
  for (int b = 0; b < blocks(); ++b) {
    if (touched[static_cast<std::size_t>(b)]) refresh_partials(b);
  }
}

void Engine::step() {
  phase_theta();
  if (pool_) {
    parallel_sweep();
  } else {
    for (int b = 0; b < blocks(); ++b) run_block(b);
  }
  apply_shuffle();
  ++iteration_;
}

void Engine::check_invariants() const {
  validate_state(state_, *corpus_, *tree_);
  std::vector<int> entity_block(static_cast<std::size_t>(state_.E), -1);
  for (int b = 0; b < blocks(); ++b) {
    const auto& list = entities_[static_cast<std::size_t>(b)];
    if (!std::is_sorted(list.begin(), list.end())) {
      throw RuntimeAbort("engine: entity list not sorted");
    }
    for (int e : list) {
      if (entity_block[static_cast<std::size_t>(e)] != -1) {
        throw RuntimeAbort("engine: entity in two blocks");
      }
      entity_block[static_cast<std::size_t>(e)] = b;
      if (tree_->assign(&state_.Y[static_cast<std::size_t>(e) *
                                  static_cast<std::size_t>(state_.A)]) != b) {
        throw RuntimeAbort("engine: entity stored in the wrong block");
      }
    }
  }
  for (int e = 0; e < state_.E; ++e) {
    if (entity_block[static_cast<std::size_t>(e)] == -1) {
      throw RuntimeAbort("engine: entity missing from all blocks");
    }
  }

  std::vector<std::vector<int>> expect_records(static_cast<std::size_t>(state_.E));
  for (int r = 0; r < state_.R; ++r) {
    const int e = state_.lambda[static_cast<std::size_t>(r)];
    expect_records[static_cast<std::size_t>(e)].push_back(r);
    if (state_.gamma[static_cast<std::size_t>(r)] !=
        entity_block[static_cast<std::size_t>(e)]) {
      throw RuntimeAbort("engine: record block differs from its entity's block");
    }
  }
  if (expect_records != entity_records_) {
    throw RuntimeAbort("engine: linked-record lists inconsistent with lambda");
  }
  long total_records = 0;
  for (int b = 0; b < blocks(); ++b) {
    const auto& list = records_[static_cast<std::size_t>(b)];
    if (!std::is_sorted(list.begin(), list.end())) {
      throw RuntimeAbort("engine: record list not sorted");
    }
    total_records += static_cast<long>(list.size());
    for (int r : list) {
      if (state_.gamma[static_cast<std::size_t>(r)] != b) {
        throw RuntimeAbort("engine: record stored in the wrong block");
      }
    }
    InvertedIndex fresh(state_.A);
    fresh.rebuild(state_, entities_[static_cast<std::size_t>(b)]);
    if (!fresh.same_contents(index_[static_cast<std::size_t>(b)])) {
      throw RuntimeAbort("engine: inverted index out of sync");
    }
  }
  if (total_records != state_.R) {
    throw RuntimeAbort("engine: record conservation violated");
  }
}

// ---------------------------------------------------------------------------
// Checkpointing.

namespace {

constexpr char kMagic[4] = {'E', 'L', 'N', 'K'};
constexpr std::int32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("checkpoint: truncated stream");
  return value;
}

template <typename T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
  write_pod(out, static_cast<std::int64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
std::vector<T> read_vec(std::istream& in) {
  const auto n = read_pod<std::int64_t>(in);
  if (n < 0) throw DataError("checkpoint: negative array length");
  std::vector<T> v(static_cast<std::size_t>(n));
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(T)));
  if (!in) throw DataError("checkpoint: truncated stream");
  return v;
}

void write_rng(std::ostream& out, const Rng& rng) {
  std::ostringstream oss;
  rng.save(oss);
  const std::string text = oss.str();
  write_pod(out, static_cast<std::int64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

void read_rng(std::istream& in, Rng& rng) {
  const auto n = read_pod<std::int64_t>(in);
  std::string text(static_cast<std::size_t>(n), '\0');
  in.read(text.data(), static_cast<std::streamsize>(n));
  if (!in) throw DataError("checkpoint: truncated stream");
  std::istringstream iss(text);
  rng.load(iss);
}

}  // namespace

void Engine::save(std::ostream& out) const {
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::int32_t>(sampler_));
  write_pod(out, static_cast<std::int64_t>(iteration_));
  write_pod(out, static_cast<std::int32_t>(state_.E));
  write_pod(out, static_cast<std::int32_t>(state_.A));
  write_pod(out, static_cast<std::int32_t>(state_.R));
  write_pod(out, static_cast<std::int32_t>(state_.T));
  write_vec(out, state_.Y);
  write_vec(out, state_.lambda);
  write_vec(out, state_.gamma);
  write_vec(out, state_.Z);
  write_vec(out, state_.theta);
  write_rng(out, manager_rng_);
  write_pod(out, static_cast<std::int32_t>(block_rng_.size()));
  for (const Rng& rng : block_rng_) write_rng(out, rng);
  if (!out) throw DataError("checkpoint: write failed");
}

void Engine::load(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("checkpoint: bad magic");
  }
  if (read_pod<std::int32_t>(in) != kVersion) {
    throw DataError("checkpoint: unsupported version");
  }
  if (read_pod<std::int32_t>(in) != static_cast<std::int32_t>(sampler_)) {
    throw ConfigError("checkpoint: sampler variant mismatch");
  }
  const auto iteration = read_pod<std::int64_t>(in);
  const auto e = read_pod<std::int32_t>(in);
  const auto a = read_pod<std::int32_t>(in);
  const auto r = read_pod<std::int32_t>(in);
  const auto t = read_pod<std::int32_t>(in);
  if (e != state_.E || a != state_.A || r != state_.R || t != state_.T) {
    throw ConfigError("checkpoint: dimensions do not match the corpus/config");
  }
  state_.Y = read_vec<ValueId>(in);
  state_.lambda = read_vec<int>(in);
  state_.gamma = read_vec<int>(in);
  state_.Z = read_vec<std::uint8_t>(in);
  state_.theta = read_vec<double>(in);
  read_rng(in, manager_rng_);
  const auto n_rng = read_pod<std::int32_t>(in);
  if (n_rng != static_cast<std::int32_t>(block_rng_.size())) {
    throw ConfigError("checkpoint: block count mismatch");
  }
  for (Rng& rng : block_rng_) read_rng(in, rng);
  iteration_ = iteration;
  validate_state(state_, *corpus_, *tree_);
  rebuild_derived();
}

// ---------------------------------------------------------------------------
// Run driver.

namespace {

namespace fs = std::filesystem;

void write_trace_row(std::ofstream& trace, long iteration, const SummaryRow& row) {
  trace << iteration << ',' << row.observed_entities;
  for (long d : row.agg_distortion) trace << ',' << d;
  for (int c : row.cluster_size_dist) trace << ',' << c;
  trace << '\n';
}

void write_snapshot(const fs::path& path, const std::vector<int>& lambda) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write("LNKS", 4);
  write_pod(out, static_cast<std::int64_t>(lambda.size()));
  out.write(reinterpret_cast<const char*>(lambda.data()),
            static_cast<std::streamsize>(lambda.size() * sizeof(int)));
  if (!out) throw DataError("cannot write linkage snapshot " + path.string());
}

void write_checkpoint(const Engine& engine, const fs::path& dir) {
  const fs::path tmp = dir / "state.bin.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open checkpoint file in " + dir.string());
    engine.save(out);
  }
  fs::rename(tmp, dir / "state.bin");
}

}  // namespace

std::vector<int> read_linkage_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open linkage snapshot " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "LNKS", 4) != 0) {
    throw DataError("bad linkage snapshot " + path);
  }
  return read_vec<int>(in);
}

void run_engine(Engine& engine, const RunOptions& options) {
  if (options.thin <= 0) throw ConfigError("thin must be positive");
  if (options.iterations < 0) throw ConfigError("iterations must be >= 0");
  if (options.out_dir.empty()) throw ConfigError("output directory required");
  const fs::path dir(options.out_dir);
  fs::create_directories(dir / "linkage");

  const bool fresh = engine.iteration() == 0;
  std::ofstream trace(dir / "trace.csv",
                      fresh ? std::ios::trunc : std::ios::app);
  std::ofstream timing(dir / "timing.csv",
                       fresh ? std::ios::trunc : std::ios::app);
  if (!trace || !timing) throw DataError("cannot open trace files in " + dir.string());
  if (fresh) {
    trace << "iteration,observed_entities";
    for (int a = 0; a < engine.state().A; ++a) trace << ",distortion_" << a;
    for (int k = 0; k <= kClusterSizeMax; ++k) trace << ",clusters_" << k;
    trace << ",clusters_over\n";
    timing << "iteration,seconds\n";
    write_checkpoint(engine, dir);
  }

  const long target = engine.iteration() + options.iterations;
  while (engine.iteration() < target) {
    const auto start = std::chrono::steady_clock::now();
    engine.step();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const long k = engine.iteration();
    if (k % options.thin == 0) {
      SummaryRow row = summarize(engine.state(), engine.corpus());
      write_trace_row(trace, k, row);
      timing << k << ',' << seconds << '\n';
      write_snapshot(dir / "linkage" / ("iter-" + std::to_string(k) + ".bin"),
                     engine.state().lambda);
    }
    if (options.checkpoint_interval > 0 && k % options.checkpoint_interval == 0) {
      write_checkpoint(engine, dir);
    }
  }
  write_checkpoint(engine, dir);
  trace.flush();
  timing.flush();
  if (!trace || !timing) throw DataError("trace write failed in " + dir.string());
}

}  // namespace entlink
