#include <doctest.h>

#include <sstream>

#include "dcsim/metrics.hpp"

using namespace dcsim;

namespace {

AccessOutcome read_outcome(PathCase c, Cycle latency,
                           BlockType t = BlockType::Following) {
  AccessOutcome o;
  o.op = Op::Read;
  o.case_label = c;
  o.dram_cache_hit = c == PathCase::A || c == PathCase::B1 || c == PathCase::B2;
  o.tag_cache_hit = c == PathCase::A || c == PathCase::C;
  o.latency = latency;
  o.block_type_current = t;
  return o;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  return out;
}

}  // namespace

TEST_CASE("one following hit gives a full hit rate") {
  const RunStats s = fold({read_outcome(PathCase::A, 49)});
  CHECK(s.reads == 1);
  CHECK(s.dram_hit_rate == 1.0);
  CHECK(s.tag_cache_hit_rate == 1.0);
  CHECK(s.case_fractions[0] == 1.0);
  CHECK(s.mean_hit_latency == 49.0);
}

TEST_CASE("empty log gives zero stats") {
  const RunStats s = fold({});
  CHECK(s.record_count == 0);
  CHECK(s.reads == 0);
  CHECK(s.dram_hit_rate == 0.0);
  CHECK(s.mean_hit_latency == 0.0);
  for (double f : s.case_fractions) CHECK(f == 0.0);
  const auto doc = result_document(s, nlohmann::ordered_json::object());
  CHECK((doc["schema"] == kSchemaVersion));
  CHECK((doc["stats"]["record_count"] == 0));
  CHECK((doc["stats"]["latency"]["hit_percentiles"]["p99"] == 0));
}

TEST_CASE("miss penalty is miss latency minus hit latency per type") {
  const RunStats s = fold({read_outcome(PathCase::B1, 85, BlockType::Leading),
                           read_outcome(PathCase::D, 173, BlockType::Leading)});
  const TypeLatency& l = s.by_type[0];
  CHECK(l.mean_hit() == 85.0);
  CHECK(l.mean_miss() == 173.0);
  CHECK(l.miss_penalty() == 88.0);
}

TEST_CASE("writes count as records but not as reads") {
  AccessOutcome w = read_outcome(PathCase::A, 500);
  w.op = Op::Write;
  const RunStats s = fold({w, read_outcome(PathCase::C, 97)});
  CHECK(s.record_count == 2);
  CHECK(s.writes == 1);
  CHECK(s.reads == 1);
  CHECK(s.dram_hit_rate == 0.0);
  CHECK(s.mean_read_latency == 97.0);
}

TEST_CASE("case fractions partition the reads") {
  std::vector<AccessOutcome> outs;
  const PathCase cases[] = {PathCase::A, PathCase::B1, PathCase::B2,
                            PathCase::C, PathCase::D};
  for (int i = 0; i < 1001; ++i) outs.push_back(read_outcome(cases[i * 7 % 5], 50 + i));
  const RunStats s = fold(outs);
  double sum = 0;
  for (double f : s.case_fractions) sum += f;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  const double hits = double(s.cases[0] + s.cases[1] + s.cases[2]);
  CHECK(s.dram_hit_rate == hits / double(s.reads));
}

TEST_CASE("histogram percentiles report bucket upper edges") {
  LatencyHistogram h;
  for (Cycle c = 0; c < 100; ++c) h.add(c);
  CHECK(h.count() == 100);
  CHECK(h.percentile(0.5) == 56);
  CHECK(h.percentile(1.0) == 104);
  h.add(1'000'000);
  CHECK(h.percentile(1.0) == kHistogramCap);
}

TEST_CASE("json round-trips") {
  RunStats s = fold({read_outcome(PathCase::A, 49),
                     read_outcome(PathCase::B2, 125, BlockType::Leading),
                     read_outcome(PathCase::D, 300, BlockType::Leading)});
  s.design = "gemini";
  s.workload = "LD";
  const auto j = to_json(s);
  const auto back = nlohmann::ordered_json::parse(j.dump());
  CHECK((back == j));
  CHECK(back["dram_hit_rate"].get<double>() == s.dram_hit_rate);
  CHECK((back["cases"]["B2"]["count"] == 1));
  CHECK(back["latency"]["mean_hit"].get<double>() == s.mean_hit_latency);
}

TEST_CASE("csv header and row have matching columns") {
  RunStats s = fold({read_outcome(PathCase::A, 49)});
  s.design = "lh";
  s.workload = "CD";
  std::ostringstream out;
  write_csv_header(out, s);
  write_csv_row(out, s);
  std::istringstream in(out.str());
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(!std::getline(in, extra));
  const auto h = split(header);
  const auto r = split(row);
  CHECK(h == csv_columns());
  REQUIRE(r.size() == h.size());
  CHECK(r[1] == "lh");
  CHECK(r[2] == "CD");
  CHECK(r[6] == "1");
}

TEST_CASE("filter buckets fold long runs together") {
  CHECK(FilterStats::bucket(1) == 1);
  CHECK(FilterStats::bucket(3) == 3);
  CHECK(FilterStats::bucket(4) == 4);
  CHECK(FilterStats::bucket(400) == 4);
  AccessOutcome o = read_outcome(PathCase::B1, 85, BlockType::Leading);
  o.returned_to_leading = true;
  o.following_run = 2;
  o.filter_flagged = true;
  const RunStats s = fold({o});
  CHECK(s.filter.returns[2] == 1);
  CHECK(s.filter.rate(2) == 1.0);
}
