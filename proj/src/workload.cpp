#include "dcsim/workload.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace dcsim {

TraceError::TraceError(std::size_t line, const std::string& what)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                              : what),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <class T>
bool parse_int(std::string_view s, T& out, int base = 10) {
  if (s.empty()) return false;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
  return ec == std::errc{} && p == s.data() + s.size();
}

void put_le(std::ostream& out, std::uint64_t v, int bytes) {
  std::array<char, 8> b{};
  for (int i = 0; i < bytes; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), bytes);
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

TraceRecord parse_trace_line(const std::string& line, std::size_t line_no) {
  std::array<std::string_view, 4> f;
  std::string_view rest(line);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto comma = rest.find(',');
    if ((comma == std::string_view::npos) != (i == f.size() - 1)) {
      throw TraceError(line_no, "expected 4 comma-separated fields");
    }
    f[i] = trim(rest.substr(0, comma));
    if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
  }

  TraceRecord r;
  if (!parse_int(f[0], r.cycle)) {
    throw TraceError(line_no, "bad cycle '" + std::string(f[0]) + "'");
  }
  if (f[1] == "R" || f[1] == "r") {
    r.op = Op::Read;
  } else if (f[1] == "W" || f[1] == "w") {
    r.op = Op::Write;
  } else {
    throw TraceError(line_no, "bad op '" + std::string(f[1]) + "'");
  }
  std::string_view hex = f[2];
  if (hex.size() < 3 || hex[0] != '0' || (hex[1] != 'x' && hex[1] != 'X') ||
      !parse_int(hex.substr(2), r.addr, 16)) {
    throw TraceError(line_no, "bad hex address '" + std::string(f[2]) + "'");
  }
  if (r.addr >= kMaxAddr) {
    throw TraceError(line_no, "address beyond 48-bit space");
  }
  if (!parse_int(f[3], r.core)) {
    throw TraceError(line_no, "bad core '" + std::string(f[3]) + "'");
  }
  return r;
}

std::optional<TraceRecord> CsvTraceReader::next() {
  while (std::getline(in_, buf_)) {
    ++line_;
    const std::string_view t = trim(buf_);
    if (t.empty()) continue;
    if (line_ == 1 && t == kCsvHeader) continue;
    TraceRecord r = parse_trace_line(buf_, line_);
    if (r.cycle < last_cycle_) {
      throw TraceError(line_, "cycle " + std::to_string(r.cycle) +
                                  " precedes previous " +
                                  std::to_string(last_cycle_));
    }
    last_cycle_ = r.cycle;
    return r;
  }
  if (in_.bad()) throw TraceError(line_, "read failure");
  return std::nullopt;
}

BinaryTraceReader::BinaryTraceReader(std::istream& in) : in_(in) {
  char head[6];
  in_.read(head, sizeof head);
  if (in_.gcount() == 0) return;  // empty stream: no records
  if (in_.gcount() != 6 || std::memcmp(head, kBinaryMagic, 4) != 0) {
    throw TraceError(0, "not a binary trace (bad magic)");
  }
  const auto ver = get_le(reinterpret_cast<unsigned char*>(head + 4), 2);
  if (ver != kBinaryVersion) {
    throw TraceError(0, "unsupported binary trace version " +
                            std::to_string(ver));
  }
}

std::optional<TraceRecord> BinaryTraceReader::next() {
  unsigned char b[16];
  in_.read(reinterpret_cast<char*>(b), sizeof b);
  const auto got = in_.gcount();
  if (got == 0) return std::nullopt;
  ++record_;
  if (got != 16) {
    throw TraceError(0, "truncated record " + std::to_string(record_));
  }
  TraceRecord r;
  r.cycle = get_le(b, 8);
  if (b[8] > 1) {
    throw TraceError(0, "bad op in record " + std::to_string(record_));
  }
  r.op = b[8] ? Op::Write : Op::Read;
  r.core = b[9];
  r.addr = get_le(b + 10, 6);
  if (r.cycle < last_cycle_) {
    throw TraceError(0, "nonmonotonic cycle in record " +
                            std::to_string(record_));
  }
  last_cycle_ = r.cycle;
  return r;
}

std::vector<TraceRecord> parse_trace(std::istream& in) {
  CsvTraceReader reader(in);
  std::vector<TraceRecord> out;
  while (auto r = reader.next()) out.push_back(*r);
  return out;
}

void write_csv_header(std::ostream& out) { out << kCsvHeader << '\n'; }

void write_csv_record(std::ostream& out, const TraceRecord& r) {
  char hex[24];
  const auto [end, ec] = std::to_chars(hex, hex + sizeof hex, r.addr, 16);
  out << r.cycle << ',' << (r.op == Op::Write ? 'W' : 'R') << ",0x"
      << std::string_view(hex, end - hex) << ',' << r.core << '\n';
}

void write_binary_header(std::ostream& out) {
  out.write(kBinaryMagic, 4);
  put_le(out, kBinaryVersion, 2);
}

void write_binary_record(std::ostream& out, const TraceRecord& r) {
  if (r.core > 0xff) throw std::invalid_argument("core id exceeds u8");
  put_le(out, r.cycle, 8);
  put_le(out, r.op == Op::Write ? 1 : 0, 1);
  put_le(out, r.core, 1);
  put_le(out, r.addr, 6);
}

// ---------------------------------------------------------------------------

const char* to_string(WorkloadClass c) {
  switch (c) {
    case WorkloadClass::CD: return "CD";
    case WorkloadClass::LD: return "LD";
    case WorkloadClass::BF: return "BF";
    case WorkloadClass::NB: return "NB";
  }
  return "?";
}

std::optional<WorkloadClass> parse_workload_class(std::string_view s) {
  std::string u(s);
  for (char& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "CD") return WorkloadClass::CD;
  if (u == "LD") return WorkloadClass::LD;
  if (u == "BF") return WorkloadClass::BF;
  if (u == "NB") return WorkloadClass::NB;
  return std::nullopt;
}

WorkloadProfile class_profile(WorkloadClass cls, const CacheGeometry& g,
                              std::uint64_t num_records, std::uint64_t seed) {
  WorkloadProfile p;
  p.cls = cls;
  p.num_records = num_records;
  p.seed = seed;
  const std::uint64_t cap = g.cache_capacity;
  switch (cls) {
    case WorkloadClass::CD:
      // Larger than the cache, scanned in section bursts, with part of the
      // traffic aliasing recently used regions at cache-size strides.
      p.working_set = 3 * cap;
      p.burst_len = 8;
      p.reuse_distance = 1024;
      p.revisit_prob = 0.7;
      p.alias_prob = 0.3;
      p.mean_gap = 6.0;
      break;
    case WorkloadClass::LD:
      // Fits in the cache; single-block touches spread over all sets.
      p.working_set = cap / 2;
      p.burst_len = 1;
      p.mean_gap = 48.0;
      break;
    case WorkloadClass::BF:
      // Fits in the cache and is read in long section runs.
      p.working_set = cap / 2;
      p.burst_len = 8;
      p.reuse_distance = 2048;
      p.revisit_prob = 0.5;
      p.mean_gap = 12.0;
      break;
    case WorkloadClass::NB:
      // Far larger than the cache with no reuse to speak of.
      p.working_set = 8 * cap;
      p.burst_len = 1;
      p.mean_gap = 24.0;
      break;
  }
  return p;
}

std::vector<std::string> profile_errors(const WorkloadProfile& p,
                                        const CacheGeometry& g) {
  std::vector<std::string> errs;
  const std::uint64_t section_bytes = g.block_size * g.section_blocks;
  if (p.working_set < section_bytes) {
    errs.push_back("workload.working_set: smaller than one section (" +
                   std::to_string(section_bytes) + " bytes)");
  } else if (p.working_set % section_bytes != 0) {
    errs.push_back("workload.working_set: not a multiple of the section size");
  }
  if (p.working_set > kMaxAddr) {
    errs.push_back("workload.working_set: exceeds 48-bit address space");
  }
  if (p.burst_len < 1 || p.burst_len > g.ways_per_set ||
      p.burst_len > g.section_blocks) {
    errs.push_back("workload.burst_len: must be in [1, ways_per_set]");
  }
  if (!(p.revisit_prob >= 0.0 && p.revisit_prob <= 1.0)) {
    errs.push_back("workload.revisit_prob: must be in [0, 1]");
  }
  if (p.revisit_prob > 0.0 && p.reuse_distance == 0) {
    errs.push_back("workload.reuse_distance: must be > 0 when revisiting");
  }
  if (!(p.alias_prob >= 0.0 && p.alias_prob <= 1.0)) {
    errs.push_back("workload.alias_prob: must be in [0, 1]");
  }
  if (!(p.write_ratio >= 0.0 && p.write_ratio <= 1.0)) {
    errs.push_back("workload.write_ratio: must be in [0, 1]");
  }
  if (!(p.mean_gap >= 0.0) || !std::isfinite(p.mean_gap)) {
    errs.push_back("workload.mean_gap: must be a finite value >= 0");
  }
  if (p.cores == 0 || p.cores > 256) {
    errs.push_back("workload.cores: must be in [1, 256]");
  }
  return errs;
}

TraceGenerator::TraceGenerator(const WorkloadProfile& p, const CacheGeometry& g)
    : p_(p),
      section_blocks_(g.section_blocks),
      blocks_(p.working_set / g.block_size),
      sections_(blocks_ / std::max<std::uint32_t>(1, g.section_blocks)),
      cache_sections_(std::max<std::uint64_t>(1, g.num_sets())),
      block_size_(g.block_size),
      rng_(p.seed) {
  const auto errs = profile_errors(p, g);
  if (!errs.empty()) throw std::invalid_argument(errs.front());
}

// Own transforms instead of <random> distributions, whose output is
// implementation-defined; traces must match across standard libraries.
double TraceGenerator::uniform01() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::uint64_t TraceGenerator::below(std::uint64_t n) {
  // Rejection sampling for an unbiased pick.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng_();
  } while (x >= limit);
  return x % n;
}

void TraceGenerator::remember() {
  if (p_.reuse_distance == 0) return;
  recent_.push_back(cur_);
  if (recent_.size() > p_.reuse_distance) recent_.pop_front();
}

void TraceGenerator::start_visit() {
  if (!recent_.empty() && p_.revisit_prob > 0.0 &&
      uniform01() < p_.revisit_prob) {
    cur_ = recent_[below(recent_.size())];
  } else if (!recent_.empty() && p_.alias_prob > 0.0 &&
             sections_ > cache_sections_ && uniform01() < p_.alias_prob) {
    const Visit base = recent_[below(recent_.size())];
    const std::uint64_t regions = sections_ / cache_sections_;
    const std::uint64_t shift = 1 + below(std::max<std::uint64_t>(1, regions - 1));
    cur_ = {(base.section + shift * cache_sections_) % sections_, base.offset};
    remember();
  } else {
    cur_.section = below(sections_);
    // Scans start on burst-aligned boundaries within the section.
    const std::uint32_t slots =
        std::max<std::uint32_t>(1, section_blocks_ / p_.burst_len);
    cur_.offset = static_cast<std::uint32_t>(below(slots)) * p_.burst_len;
    remember();
  }
  left_in_visit_ = p_.burst_len;
  step_ = 0;
}

std::optional<TraceRecord> TraceGenerator::next() {
  if (emitted_ >= p_.num_records) return std::nullopt;
  if (left_in_visit_ == 0) start_visit();

  const std::uint64_t block =
      cur_.section * section_blocks_ + (cur_.offset + step_) % section_blocks_;
  ++step_;
  --left_in_visit_;

  TraceRecord r;
  r.cycle = static_cast<Cycle>(clock_);
  r.addr = block * block_size_;
  r.op = (p_.write_ratio > 0.0 && uniform01() < p_.write_ratio) ? Op::Write
                                                                 : Op::Read;
  r.core = static_cast<std::uint32_t>(emitted_ % p_.cores);
  ++emitted_;

  // Exponential inter-arrival gaps.
  if (p_.mean_gap > 0.0) clock_ += -p_.mean_gap * std::log1p(-uniform01());
  return r;
}

std::vector<TraceRecord> generate(const WorkloadProfile& p,
                                  const CacheGeometry& g) {
  TraceGenerator gen(p, g);
  std::vector<TraceRecord> out;
  out.reserve(p.num_records);
  while (auto r = gen.next()) out.push_back(*r);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::uint32_t> l_stable_segments(
    const std::vector<BlockType>& seq) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i == 0 || seq[i] != seq[i - 1]) {
      out.push_back(1);
    } else {
      ++out.back();
    }
  }
  return out;
}

void TypeTracker::observe(BlockId block, BlockType current,
                          std::optional<BlockType> stored,
                          bool caused_batch_fetch) {
  ++classified_;
  if (caused_batch_fetch) {
    ++fetches_;
    // An uncached block is installed with the trigger's type.
    if (stored.value_or(current) == BlockType::Leading) ++fetches_leading_;
  }
  History& h = blocks_[block];
  if (h.count == 0) {
    h.last = current;
    h.run = 1;
  } else if (h.last == current) {
    ++h.run;
  } else {
    ++closed_[h.run];
    h.switched = true;
    h.last = current;
    h.run = 1;
  }
  if (h.count < UINT32_MAX) ++h.count;
}

TypeAnalysis TypeTracker::finish() const {
  TypeAnalysis a;
  a.l_stable = closed_;
  a.classified = classified_;
  a.batch_fetches = fetches_;
  a.fetches_by_leading = fetches_leading_;
  for (const auto& [block, h] : blocks_) {
    ++a.blocks_seen;
    if (h.count >= 2) ++a.blocks_reused;
    if (h.switched) ++a.blocks_switched;
    ++a.l_stable[h.run];  // the open run closes at end of log
  }
  a.transition_ratio =
      a.blocks_reused ? double(a.blocks_switched) / double(a.blocks_reused)
                      : 0.0;
  a.tag_fetch_attribution =
      fetches_ ? double(fetches_leading_) / double(fetches_) : 0.0;
  return a;
}

}  // namespace dcsim
