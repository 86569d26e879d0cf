#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dcsim/geometry.hpp"
#include "dcsim/policy.hpp"
#include "dcsim/tag_cache.hpp"
#include "dcsim/tag_store.hpp"
#include "dcsim/timing.hpp"

namespace dcsim {

enum class Design : std::uint8_t { Gemini, LH, Direct };

const char* to_string(Design d);
std::optional<Design> parse_design(std::string_view s);

struct Request {
  Cycle arrival_cycle = 0;
  Op op = Op::Read;
  Addr addr = 0;
  std::uint32_t origin = 0;
};

/// Request path: tag-cache hit/miss crossed with DRAM-cache hit/miss, with
/// B1/B2 separating concurrent from serialized tag and data access.
enum class PathCase : std::uint8_t { A, B1, B2, C, D };

inline constexpr std::size_t kPathCaseCount = 5;
const char* to_string(PathCase c);

struct AccessOutcome {
  std::uint64_t id = 0;
  Op op = Op::Read;
  PathCase case_label = PathCase::D;
  bool dram_cache_hit = false;
  bool tag_cache_hit = false;
  Cycle arrival = 0;
  Cycle latency = 0;
  std::uint32_t bytes_cache = 0;  // demand-path bytes only
  std::uint32_t bytes_mem = 0;
  BlockType block_type_current = BlockType::Leading;
  std::optional<BlockType> block_type_stored;
  BlockId block_id = 0;
  bool caused_batch_fetch = false;
  bool static_position = false;  // hit found at the block's static way
  MappingAction mapping = MappingAction::None;

  // Type-variation filter bookkeeping, set on a following->leading return.
  bool returned_to_leading = false;
  bool filter_flagged = false;
  std::uint32_t following_run = 0;
};

using OutcomeSink = std::function<void(const AccessOutcome&)>;

struct TagCacheConfig {
  std::uint32_t entries = 128;
  std::uint32_t assoc = 8;
  Cycle latency = 9;
};

struct PolicyOptions {
  bool filter_enabled = true;
  bool reservation_enabled = true;
};

struct ControllerConfig {
  Design design = Design::Gemini;
  CacheGeometry geometry;  // the 16-way organization; others derive from it
  std::uint32_t lh_ways = 14;
  TagCacheConfig tag_cache;
  PolicyOptions policy;
  double p_bypass = 0.0;
  std::uint64_t seed = 1;
};

/// Side counters a controller keeps beyond per-request outcomes.
struct ControllerCounters {
  std::uint64_t batch_fetches = 0;
  std::uint64_t tag_writebacks = 0;
  std::uint64_t tag_updates = 0;
  std::uint64_t fills = 0;
  std::uint64_t bypassed_fills = 0;
  std::uint64_t dirty_evictions = 0;
  std::uint64_t migrations = 0;
  std::uint64_t ref_clears = 0;
  std::uint64_t reservations = 0;
  std::uint64_t neighbor_prefetches = 0;
};

/// One DRAM cache design driving the timing engine. access() is called at
/// the request's arrival cycle; the outcome reaches the sink when the
/// request's last demand transaction completes.
class Controller {
 public:
  Controller(const ControllerConfig& cfg, const CacheGeometry& geometry,
             TagLayout layout, TimingEngine& engine, OutcomeSink sink);
  virtual ~Controller() = default;
  Controller(const Controller&) = delete;
  Controller& operator=(const Controller&) = delete;

  void access(const Request& req);

  virtual Design design() const = 0;

  const CacheGeometry& geometry() const { return geom_; }
  const BankLayout& layout() const { return layout_; }
  TagCache& tag_cache() { return tags_; }
  TagStore& store() { return store_; }
  const ControllerCounters& counters() const { return counters_; }
  std::size_t outstanding() const { return live_; }

 protected:
  struct Live {
    Request req;
    BlockLocator loc;
    AccessOutcome out;
    std::uint32_t pending = 0;
    Cycle wait_ready = 0;
  };

  virtual void read(std::uint32_t rid) = 0;
  virtual void write(std::uint32_t rid) = 0;

  Live& live(std::uint32_t rid) { return slots_[rid]; }

  // Transaction builders.
  Transaction cache_txn(std::uint64_t set_index, bool tag_row, Purpose p,
                        TxnKind kind, std::uint32_t bytes = 64) const;
  Transaction mem_txn(BlockId block, Purpose p, TxnKind kind) const;

  /// Issues a demand transaction for `rid`, charging its bytes to the
  /// outcome; the request finishes when its last demand txn completes.
  void demand(std::uint32_t rid, const Transaction& t,
              std::function<void(const Transaction&)> then = {});
  void background(const Transaction& t,
                  std::function<void(const Transaction&)> then = {});

  /// Runs `fn` at cycle `at` (>= now).
  void at(Cycle at, std::function<void()> fn);

  /// Dirty victims go to memory; `data_in_hand` skips the cache read.
  void retire_victim(std::uint64_t set_index, const TagEntry& victim,
                     bool data_in_hand);

  /// Installs a fetched batch, writing back a modified LRU victim, and
  /// releases requests that were waiting on it.
  void install_batch(std::uint64_t key);
  void wait_for_batch(std::uint32_t rid, std::uint64_t key, Cycle ready);
  virtual void resume_following(std::uint32_t rid) = 0;

  /// Memory read for a miss followed by a fill write when data returns.
  void fetch_and_fill(std::uint32_t rid, bool fill, std::uint32_t fill_bytes);

  /// Read-hit bookkeeping shared by every design: A bit and type history.
  void touch(TagEntry& e, BlockType current);

  Cycle now() const { return engine_.now(); }

  ControllerConfig cfg_;
  CacheGeometry geom_;
  BankLayout layout_;
  TimingEngine& engine_;
  OutcomeSink sink_;
  TagCache tags_;
  TagStore store_;
  ControllerCounters counters_;
  std::mt19937_64 rng_;

 private:
  std::uint32_t alloc(const Request& req);
  void complete(std::uint32_t rid);

  std::vector<Live> slots_;
  std::vector<std::uint32_t> free_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> waiters_;
  std::uint64_t next_id_ = 0;
  std::size_t live_ = 0;
};

/// Hybrid-mapped cache: leading blocks at their static way (tag batch and
/// data fetched in parallel from different banks), following blocks placed
/// by RV-CLOCK.
class GeminiController final : public Controller {
 public:
  GeminiController(const ControllerConfig& cfg, TimingEngine& engine,
                   OutcomeSink sink);
  Design design() const override { return Design::Gemini; }

 private:
  void read(std::uint32_t rid) override;
  void write(std::uint32_t rid) override;
  void resume_following(std::uint32_t rid) override;
  void on_batch(std::uint32_t rid);
  /// Filter, reservation and mapping policy for a read hit at `way`.
  void update_on_hit(std::uint32_t rid, SetView set, std::uint32_t way);
};

/// Set-associative baseline with tags in the data row: a tag-cache miss
/// reads the batch, then the data (serialized). Plain CLOCK.
class LhController final : public Controller {
 public:
  LhController(const ControllerConfig& cfg, TimingEngine& engine,
               OutcomeSink sink);
  Design design() const override { return Design::LH; }

 private:
  void read(std::uint32_t rid) override;
  void write(std::uint32_t rid) override;
  void resume_following(std::uint32_t rid) override;
  void on_batch(std::uint32_t rid);
};

/// Direct-mapped baseline: tag-and-data lines, a tag cache of individual
/// tags filled with the line's own and next neighbour's tag, and
/// probabilistic fill bypass.
class DirectController final : public Controller {
 public:
  DirectController(const ControllerConfig& cfg, TimingEngine& engine,
                   OutcomeSink sink);
  Design design() const override { return Design::Direct; }

  /// Bytes moved by one tag-and-data access (data plus one extra burst).
  static constexpr std::uint32_t kTadBytes = 128;

 private:
  void read(std::uint32_t rid) override;
  void write(std::uint32_t rid) override;
  void resume_following(std::uint32_t rid) override;
  void on_probe(std::uint32_t rid);
  bool should_fill();
};

std::unique_ptr<Controller> make_controller(const ControllerConfig& cfg,
                                            TimingEngine& engine,
                                            OutcomeSink sink);

}  // namespace dcsim
