#include "dcsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dcsim {

using nlohmann::ordered_json;

void LatencyHistogram::add(Cycle latency) {
  const std::size_t b =
      std::min<std::size_t>(latency / kBucketWidth, kBuckets - 1);
  ++buckets_[b];
  ++count_;
}

void LatencyHistogram::merge(const LatencyHistogram& o) {
  for (std::size_t i = 0; i < kBuckets; ++i) buckets_[i] += o.buckets_[i];
  count_ += o.count_;
}

Cycle LatencyHistogram::percentile(double q) const {
  if (count_ == 0) return 0;
  const auto rank = static_cast<std::uint64_t>(
      std::ceil(std::clamp(q, 0.0, 1.0) * double(count_)));
  std::uint64_t seen = 0;
  for (std::size_t i = 0; i < kBuckets; ++i) {
    seen += buckets_[i];
    if (seen >= std::max<std::uint64_t>(rank, 1)) {
      return i == kBuckets - 1 ? kHistogramCap : (i + 1) * kBucketWidth;
    }
  }
  return kHistogramCap;
}

void StatsCollector::add(const AccessOutcome& o) {
  ++acc_.record_count;
  acc_.demand_bytes_cache += o.bytes_cache;
  acc_.demand_bytes_mem += o.bytes_mem;
  if (o.op == Op::Write) {
    ++acc_.writes;
    return;
  }

  ++acc_.reads;
  ++acc_.cases[static_cast<std::size_t>(o.case_label)];
  read_latency_sum_ += o.latency;

  TypeLatency& t = acc_.by_type[static_cast<std::size_t>(o.block_type_current)];
  if (o.dram_cache_hit) {
    ++t.hits;
    t.hit_latency_sum += o.latency;
    t.hit_hist.add(o.latency);
  } else {
    ++t.misses;
    t.miss_latency_sum += o.latency;
  }

  if (o.returned_to_leading) {
    const std::size_t b = FilterStats::bucket(o.following_run);
    ++acc_.filter.returns[b];
    if (o.filter_flagged) ++acc_.filter.flagged[b];
  }
  types_.observe(o.block_id, o.block_type_current, o.block_type_stored,
                 o.caused_batch_fetch);
}

RunStats StatsCollector::finish(const ControllerCounters& counters,
                                const DeviceLog& cache,
                                const DeviceLog& memory) const {
  RunStats s = acc_;
  s.counters = counters;
  s.cache_log = cache;
  s.memory_log = memory;
  s.mean_memory_queue_delay = memory.mean_queue_delay();

  if (s.reads > 0) {
    const double n = double(s.reads);
    for (std::size_t i = 0; i < s.cases.size(); ++i) {
      s.case_fractions[i] = double(s.cases[i]) / n;
    }
    using enum PathCase;
    const auto c = [&](PathCase p) { return s.cases[std::size_t(p)]; };
    s.dram_hit_rate = double(c(A) + c(B1) + c(B2)) / n;
    s.tag_cache_hit_rate = double(c(A) + c(C)) / n;
    s.mean_read_latency = double(read_latency_sum_) / n;
  }

  std::uint64_t hits = 0;
  std::uint64_t hit_sum = 0;
  for (const TypeLatency& t : s.by_type) {
    hits += t.hits;
    hit_sum += t.hit_latency_sum;
    s.hit_hist.merge(t.hit_hist);
  }
  s.mean_hit_latency = hits ? double(hit_sum) / double(hits) : 0.0;
  s.types = types_.finish();
  return s;
}

RunStats fold(const std::vector<AccessOutcome>& outcomes) {
  StatsCollector c;
  for (const AccessOutcome& o : outcomes) c.add(o);
  return c.finish({}, {}, {});
}

// ---------------------------------------------------------------------------

namespace {

ordered_json percentiles(const LatencyHistogram& h) {
  return {{"p50", h.percentile(0.50)},
          {"p90", h.percentile(0.90)},
          {"p99", h.percentile(0.99)}};
}

ordered_json type_json(const TypeLatency& t) {
  ordered_json j{{"hits", t.hits},
                 {"misses", t.misses},
                 {"mean_hit", t.mean_hit()},
                 {"mean_miss", t.mean_miss()},
                 {"miss_penalty", t.miss_penalty()}};
  j["hit_percentiles"] = percentiles(t.hit_hist);
  return j;
}

ordered_json device_json(const DeviceLog& d) {
  ordered_json by_purpose = ordered_json::object();
  for (std::size_t i = 0; i < kPurposeCount; ++i) {
    if (d.count[i] == 0) continue;
    by_purpose[to_string(static_cast<Purpose>(i))] = {{"count", d.count[i]},
                                                      {"bytes", d.bytes[i]}};
  }
  return {{"transactions", d.transactions},
          {"reads", d.reads},
          {"writes", d.writes},
          {"row_hits", d.row_hits},
          {"bytes", d.total_bytes},
          {"mean_queue_delay", d.mean_queue_delay()},
          {"by_purpose", by_purpose}};
}

}  // namespace

ordered_json to_json(const RunStats& s) {
  ordered_json j;
  j["design"] = s.design;
  j["workload"] = s.workload;
  j["record_count"] = s.record_count;
  j["reads"] = s.reads;
  j["writes"] = s.writes;
  j["dram_hit_rate"] = s.dram_hit_rate;
  j["tag_cache_hit_rate"] = s.tag_cache_hit_rate;

  ordered_json cases = ordered_json::object();
  for (std::size_t i = 0; i < s.cases.size(); ++i) {
    cases[to_string(static_cast<PathCase>(i))] = {
        {"count", s.cases[i]}, {"fraction", s.case_fractions[i]}};
  }
  j["cases"] = cases;

  ordered_json lat;
  lat["mean_read"] = s.mean_read_latency;
  lat["mean_hit"] = s.mean_hit_latency;
  lat["hit_percentiles"] = percentiles(s.hit_hist);
  lat["leading"] = type_json(s.by_type[0]);
  lat["following"] = type_json(s.by_type[1]);
  j["latency"] = lat;

  j["bytes"] = {{"demand_cache", s.demand_bytes_cache},
                {"demand_memory", s.demand_bytes_mem},
                {"cache", device_json(s.cache_log)},
                {"memory", device_json(s.memory_log)}};
  j["mean_memory_queue_delay"] = s.mean_memory_queue_delay;

  ordered_json hist = ordered_json::object();
  for (const auto& [len, n] : s.types.l_stable) hist[std::to_string(len)] = n;
  j["types"] = {{"blocks_seen", s.types.blocks_seen},
                {"blocks_reused", s.types.blocks_reused},
                {"blocks_switched", s.types.blocks_switched},
                {"transition_ratio", s.types.transition_ratio},
                {"batch_fetches", s.types.batch_fetches},
                {"tag_fetch_attribution", s.types.tag_fetch_attribution},
                {"l_stable", hist}};

  ordered_json filt = ordered_json::object();
  static constexpr const char* kNames[] = {"0", "1", "2", "3", "gt3"};
  for (std::size_t b = 1; b < 5; ++b) {
    filt[kNames[b]] = {{"returns", s.filter.returns[b]},
                       {"flagged", s.filter.flagged[b]},
                       {"rate", s.filter.rate(b)}};
  }
  j["filter_by_l_stable"] = filt;

  const ControllerCounters& c = s.counters;
  j["counters"] = {{"batch_fetches", c.batch_fetches},
                   {"tag_writebacks", c.tag_writebacks},
                   {"tag_updates", c.tag_updates},
                   {"fills", c.fills},
                   {"bypassed_fills", c.bypassed_fills},
                   {"dirty_evictions", c.dirty_evictions},
                   {"migrations", c.migrations},
                   {"ref_clears", c.ref_clears},
                   {"reservations", c.reservations},
                   {"neighbor_prefetches", c.neighbor_prefetches}};
  return j;
}

ordered_json result_document(const RunStats& s, const ordered_json& config) {
  ordered_json doc;
  doc["schema"] = kSchemaVersion;
  doc["stats"] = to_json(s);
  doc["config"] = config;
  return doc;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "schema", "design", "workload", "records", "reads", "writes",
      "dram_hit_rate", "tag_cache_hit_rate",
      "frac_A", "frac_B1", "frac_B2", "frac_C", "frac_D",
      "mean_read_latency", "mean_hit_latency", "hit_p50", "hit_p90", "hit_p99",
      "leading_mean_hit", "following_mean_hit",
      "leading_miss_penalty", "following_miss_penalty",
      "demand_bytes_cache", "demand_bytes_memory",
      "cache_bytes", "memory_bytes", "mean_memory_queue_delay",
      "transition_ratio", "tag_fetch_attribution",
      "filter_rate_1", "filter_rate_2", "filter_rate_3", "filter_rate_gt3",
      "migrations"};
  return cols;
}

void write_csv_header(std::ostream& out, const RunStats&) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i ? "," : "") << cols[i];
  }
  out << '\n';
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_csv_row(std::ostream& out, const RunStats& s) {
  const auto& L = s.by_type[0];
  const auto& F = s.by_type[1];
  out << kSchemaVersion << ',' << s.design << ',' << s.workload << ','
      << s.record_count << ',' << s.reads << ',' << s.writes << ','
      << num(s.dram_hit_rate) << ',' << num(s.tag_cache_hit_rate);
  for (double f : s.case_fractions) out << ',' << num(f);
  out << ',' << num(s.mean_read_latency) << ',' << num(s.mean_hit_latency)
      << ',' << s.hit_hist.percentile(0.5) << ','
      << s.hit_hist.percentile(0.9) << ',' << s.hit_hist.percentile(0.99)
      << ',' << num(L.mean_hit()) << ',' << num(F.mean_hit()) << ','
      << num(L.miss_penalty()) << ',' << num(F.miss_penalty()) << ','
      << s.demand_bytes_cache << ',' << s.demand_bytes_mem << ','
      << s.cache_log.total_bytes << ',' << s.memory_log.total_bytes << ','
      << num(s.mean_memory_queue_delay) << ','
      << num(s.types.transition_ratio) << ','
      << num(s.types.tag_fetch_attribution);
  for (std::size_t b = 1; b < 5; ++b) out << ',' << num(s.filter.rate(b));
  out << ',' << s.counters.migrations << '\n';
}

}  // namespace dcsim
