#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "entlink/kernels.hpp"
#include "entlink/model.hpp"

namespace entlink {

enum class Sampler { Gibbs, Pcg1, Pcg2 };

Sampler sampler_from_string(const std::string& name);
std::string to_string(Sampler sampler);

/// An entity scheduled to move to a new block, together with all its linked
/// records. Envelopes are collected during the entity phase and applied at
/// the iteration boundary in deterministic block order.
struct ShuffleEnvelope {
  int source = 0;
  int destination = 0;
  int entity = 0;
  std::vector<int> records;
};

/// Sums per-block partial distortion counts (T x A, row-major) into the
/// global per-(table, attribute) totals.
std::vector<long> aggregate_z_counts(const std::vector<std::vector<long>>& partials);

/// Manager-worker sampler over the blocks of a fitted tree. Each block owns
/// its entities, the records linked to them, an inverted index, and an RNG
/// stream keyed by block id, so results are bit-identical whether blocks run
/// sequentially or on worker threads. Per iteration: (1) the manager draws
/// Theta from aggregated distortion counts, (2) each block updates its
/// record links, (3) each block redraws entity attributes jointly with block
/// assignments (and, in the marginalized variants, the linked records'
/// distortion indicators), (4) remaining distortion indicators are redrawn;
/// entities whose block changed are shuffled before the next iteration.
class Engine {
 public:
  Engine(const Corpus& corpus, const Hyperparameters& hyper,
         const BlockingTree& tree, const SimilarityCache& cache,
         const Empirical& phi, const BaseTables& base, Sampler sampler,
         std::uint64_t seed, bool parallel = false);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  void step();

  long iteration() const { return iteration_; }
  Sampler sampler() const { return sampler_; }
  int blocks() const { return static_cast<int>(entities_.size()); }
  const ModelState& state() const { return state_; }
  const Corpus& corpus() const { return *corpus_; }
  const std::vector<int>& block_entities(int b) const {
    return entities_[static_cast<std::size_t>(b)];
  }
  const std::vector<int>& block_records(int b) const {
    return records_[static_cast<std::size_t>(b)];
  }
  const std::vector<int>& entity_records(int e) const {
    return entity_records_[static_cast<std::size_t>(e)];
  }
  /// Envelopes applied at the end of the most recent step().
  const std::vector<ShuffleEnvelope>& last_shuffle() const { return last_shuffle_; }

  /// Structural validation of the state plus every derived structure
  /// (block membership, linked-record lists, inverted indexes).
  void check_invariants() const;

  /// Versioned binary checkpoint: latent state, iteration counter, and all
  /// RNG streams. load() requires an engine built over the same inputs and
  /// resumes bit-identically.
  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  void rebuild_derived();
  void refresh_partials(int b);
  void phase_theta();
  void run_block(int b);
  void apply_shuffle();
  void parallel_sweep();

  const Corpus* corpus_;
  const Hyperparameters* hyper_;
  const BlockingTree* tree_;
  const SimilarityCache* cache_;
  const Empirical* phi_;
  const BaseTables* base_;
  Sampler sampler_;
  bool parallel_ = false;

  ModelState state_;
  long iteration_ = 0;
  Rng manager_rng_;
  std::vector<Rng> block_rng_;

  std::vector<std::vector<int>> entities_;        // per block, sorted
  std::vector<std::vector<int>> records_;         // per block, sorted
  std::vector<std::vector<int>> entity_records_;  // per entity, sorted
  std::vector<InvertedIndex> index_;              // per block
  std::vector<std::vector<long>> z_partial_;      // per block, T x A
  std::vector<std::vector<ShuffleEnvelope>> outbox_;
  std::vector<ShuffleEnvelope> last_shuffle_;

  struct Pool;
  std::unique_ptr<Pool> pool_;
};

struct RunOptions {
  long iterations = 0;
  int thin = 10;                 // trace/snapshot cadence
  long checkpoint_interval = 0;  // 0 = checkpoint only at the end
  std::string out_dir;
};

/// Drives an engine, writing trace.csv (deterministic columns only),
/// timing.csv (wall-clock seconds), linkage/iter-<k>.bin snapshots, and
/// state.bin checkpoints under out_dir. An engine with iteration() > 0
/// appends to existing outputs (resume); a fresh engine truncates them.
void run_engine(Engine& engine, const RunOptions& options);

/// Reads a linkage snapshot written by run_engine.
std::vector<int> read_linkage_snapshot(const std::string& path);

}  // namespace entlink
