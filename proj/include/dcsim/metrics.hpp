#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcsim/controller.hpp"
#include "dcsim/timing.hpp"
#include "dcsim/workload.hpp"

namespace dcsim {

inline constexpr int kSchemaVersion = 1;
inline constexpr Cycle kBucketWidth = 8;
inline constexpr Cycle kHistogramCap = 2048;

/// Fixed-width latency histogram; samples at or above the cap share the last
/// bucket and report the cap as their percentile value.
class LatencyHistogram {
 public:
  static constexpr std::size_t kBuckets = kHistogramCap / kBucketWidth + 1;

  void add(Cycle latency);
  void merge(const LatencyHistogram& o);
  std::uint64_t count() const { return count_; }
  Cycle percentile(double q) const;  // upper bucket edge, q in (0, 1]

 private:
  std::array<std::uint64_t, kBuckets> buckets_{};
  std::uint64_t count_ = 0;
};

struct TypeLatency {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t hit_latency_sum = 0;
  std::uint64_t miss_latency_sum = 0;
  LatencyHistogram hit_hist;

  double mean_hit() const {
    return hits ? double(hit_latency_sum) / double(hits) : 0.0;
  }
  double mean_miss() const {
    return misses ? double(miss_latency_sum) / double(misses) : 0.0;
  }
  double miss_penalty() const { return mean_miss() - mean_hit(); }
};

/// Filter outcomes bucketed by the following-run length that preceded a
/// return to leading. Index 4 collects runs longer than 3.
struct FilterStats {
  std::array<std::uint64_t, 5> returns{};
  std::array<std::uint64_t, 5> flagged{};

  static std::size_t bucket(std::uint32_t run) { return run > 3 ? 4 : run; }
  double rate(std::size_t b) const {
    return returns[b] ? double(flagged[b]) / double(returns[b]) : 0.0;
  }
};

struct RunStats {
  std::string design;
  std::string workload;

  std::uint64_t record_count = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::array<std::uint64_t, 5> cases{};  // read requests, indexed by PathCase
  std::array<double, 5> case_fractions{};
  double dram_hit_rate = 0.0;
  double tag_cache_hit_rate = 0.0;

  std::array<TypeLatency, 2> by_type;  // indexed by BlockType
  LatencyHistogram hit_hist;
  double mean_hit_latency = 0.0;
  double mean_read_latency = 0.0;

  std::uint64_t demand_bytes_cache = 0;
  std::uint64_t demand_bytes_mem = 0;
  DeviceLog cache_log;
  DeviceLog memory_log;
  double mean_memory_queue_delay = 0.0;

  TypeAnalysis types;
  FilterStats filter;
  ControllerCounters counters;
};

/// Single-pass reducer over access outcomes.
class StatsCollector {
 public:
  void add(const AccessOutcome& o);
  RunStats finish(const ControllerCounters& counters, const DeviceLog& cache,
                  const DeviceLog& memory) const;

 private:
  RunStats acc_;
  std::uint64_t read_latency_sum_ = 0;
  TypeTracker types_;
};

RunStats fold(const std::vector<AccessOutcome>& outcomes);

nlohmann::ordered_json to_json(const RunStats& s);
/// Whole result document: schema, the stats, and the config that made them.
nlohmann::ordered_json result_document(const RunStats& s,
                                       const nlohmann::ordered_json& config);

const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& out, const RunStats&);
void write_csv_row(std::ostream& out, const RunStats& s);

}  // namespace dcsim
