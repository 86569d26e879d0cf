#pragma once

#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcsim/geometry.hpp"
#include "dcsim/tag_store.hpp"

namespace dcsim {

struct TraceRecord {
  Cycle cycle = 0;
  Op op = Op::Read;
  Addr addr = 0;
  std::uint32_t core = 0;

  bool operator==(const TraceRecord&) const = default;
};

/// Malformed trace input. `line()` is 1-based for CSV (0 for binary).
class TraceError : public std::runtime_error {
 public:
  TraceError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr const char* kCsvHeader = "cycle,op,addr,core";

/// Streaming CSV reader. The header line is optional; blank lines are
/// skipped. Cycles must be nondecreasing.
class CsvTraceReader {
 public:
  explicit CsvTraceReader(std::istream& in) : in_(in) {}
  std::optional<TraceRecord> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  Cycle last_cycle_ = 0;
  std::string buf_;
};

/// Streaming reader for the fixed-width binary format.
class BinaryTraceReader {
 public:
  explicit BinaryTraceReader(std::istream& in);
  std::optional<TraceRecord> next();

 private:
  std::istream& in_;
  std::size_t record_ = 0;
  Cycle last_cycle_ = 0;
};

inline constexpr char kBinaryMagic[4] = {'D', 'C', 'T', 'R'};
inline constexpr std::uint16_t kBinaryVersion = 1;

/// Parse a whole CSV trace into memory. Convenience for small inputs.
std::vector<TraceRecord> parse_trace(std::istream& in);
TraceRecord parse_trace_line(const std::string& line, std::size_t line_no);

void write_csv_header(std::ostream& out);
void write_csv_record(std::ostream& out, const TraceRecord& r);
void write_binary_header(std::ostream& out);
void write_binary_record(std::ostream& out, const TraceRecord& r);

// ---------------------------------------------------------------------------
// Synthetic generation

enum class WorkloadClass : std::uint8_t { CD, LD, BF, NB };

const char* to_string(WorkloadClass c);
std::optional<WorkloadClass> parse_workload_class(std::string_view s);

struct WorkloadProfile {
  WorkloadClass cls = WorkloadClass::LD;
  std::uint64_t working_set = 0;   // bytes
  std::uint32_t burst_len = 1;     // blocks per visit
  std::uint32_t reuse_distance = 0;  // visits remembered for revisits
  double revisit_prob = 0.0;
  // New visits that land on a capacity-aligned alias of a recent visit
  // (same set and offset, another region), as with cache-size-aligned arrays.
  double alias_prob = 0.0;
  std::uint64_t num_records = 0;
  double mean_gap = 4.0;  // cycles between records
  double write_ratio = 0.0;
  std::uint32_t cores = 8;
  std::uint64_t seed = 1;
};

/// Class defaults for a cache of the given geometry.
WorkloadProfile class_profile(WorkloadClass cls, const CacheGeometry& g,
                              std::uint64_t num_records, std::uint64_t seed);

std::vector<std::string> profile_errors(const WorkloadProfile& p,
                                        const CacheGeometry& g);

/// Deterministic stream of records for a profile. Throws
/// std::invalid_argument on an invalid profile.
class TraceGenerator {
 public:
  TraceGenerator(const WorkloadProfile& p, const CacheGeometry& g);
  std::optional<TraceRecord> next();
  std::uint64_t footprint_blocks() const { return blocks_; }

 private:
  struct Visit {
    std::uint64_t section;
    std::uint32_t offset;
  };

  double uniform01();
  std::uint64_t below(std::uint64_t n);
  void start_visit();
  void remember();

  WorkloadProfile p_;
  std::uint32_t section_blocks_;
  std::uint64_t blocks_;
  std::uint64_t sections_;
  std::uint64_t cache_sections_;  // sections that fit in the cache
  std::uint64_t block_size_;
  std::mt19937_64 rng_;
  std::deque<Visit> recent_;
  Visit cur_{0, 0};
  std::uint32_t left_in_visit_ = 0;
  std::uint32_t step_ = 0;
  std::uint64_t emitted_ = 0;
  double clock_ = 0.0;
};

std::vector<TraceRecord> generate(const WorkloadProfile& p,
                                  const CacheGeometry& g);

// ---------------------------------------------------------------------------
// Block-type analysis

/// Lengths of the maximal constant-type runs of a sequence.
std::vector<std::uint32_t> l_stable_segments(const std::vector<BlockType>& seq);

struct TypeAnalysis {
  std::uint64_t blocks_seen = 0;
  std::uint64_t blocks_reused = 0;    // accessed at least twice
  std::uint64_t blocks_switched = 0;  // at least one type change
  double transition_ratio = 0.0;
  std::map<std::uint32_t, std::uint64_t> l_stable;  // run length -> runs
  std::uint64_t classified = 0;
  std::uint64_t batch_fetches = 0;
  std::uint64_t fetches_by_leading = 0;
  double tag_fetch_attribution = 0.0;
};

/// Per-block type history reducer. Memory is one small record per block.
class TypeTracker {
 public:
  void observe(BlockId block, BlockType current,
               std::optional<BlockType> stored, bool caused_batch_fetch);
  TypeAnalysis finish() const;

 private:
  struct History {
    BlockType last = BlockType::Leading;
    std::uint32_t run = 0;
    std::uint32_t count = 0;
    bool switched = false;
  };
  std::unordered_map<BlockId, History> blocks_;
  std::map<std::uint32_t, std::uint64_t> closed_;
  std::uint64_t classified_ = 0;
  std::uint64_t fetches_ = 0;
  std::uint64_t fetches_leading_ = 0;
};

}  // namespace dcsim
