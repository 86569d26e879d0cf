#include "dcsim/config.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>

extern char** environ;

namespace dcsim {

using nlohmann::ordered_json;

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(errors.empty() ? "invalid config" : errors.front()),
      errors_(std::move(errors)) {}

std::string WorkloadSpec::label() const {
  if (trace.empty()) return to_string(cls);
  const auto slash = trace.find_last_of('/');
  return slash == std::string::npos ? trace : trace.substr(slash + 1);
}

WorkloadProfile ExperimentConfig::profile() const {
  const WorkloadSpec& w = workload;
  WorkloadProfile p = class_profile(w.cls, controller.geometry, w.records,
                                    controller.seed);
  if (w.working_set) p.working_set = *w.working_set;
  if (w.burst_len) p.burst_len = *w.burst_len;
  if (w.reuse_distance) p.reuse_distance = *w.reuse_distance;
  if (w.revisit_prob) p.revisit_prob = *w.revisit_prob;
  if (w.alias_prob) p.alias_prob = *w.alias_prob;
  if (w.mean_gap) p.mean_gap = *w.mean_gap;
  if (w.write_ratio) p.write_ratio = *w.write_ratio;
  if (w.cores) p.cores = *w.cores;
  return p;
}

namespace {

using Error = std::optional<std::string>;

struct Field {
  std::string key;
  std::function<Error(ExperimentConfig&, std::string_view)> set;
  std::function<ordered_json(const ExperimentConfig&)> get;
};

// Integer with an optional binary K/M/G suffix.
Error parse_uint(std::string_view s, std::uint64_t& out) {
  if (!s.empty() && s.front() == '-') return "must not be negative";
  std::uint64_t mult = 1;
  if (!s.empty()) {
    switch (std::toupper(static_cast<unsigned char>(s.back()))) {
      case 'K': mult = 1ull << 10; break;
      case 'M': mult = 1ull << 20; break;
      case 'G': mult = 1ull << 30; break;
      default: break;
    }
    if (mult != 1) s.remove_suffix(1);
  }
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
    return "expected an unsigned integer";
  }
  if (v > UINT64_MAX / mult) return "value out of range";
  out = v * mult;
  return std::nullopt;
}

Error parse_double(std::string_view s, double& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size() ||
      !std::isfinite(out)) {
    return "expected a number";
  }
  return std::nullopt;
}

Error parse_bool(std::string_view s, bool& out) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") {
    out = true;
  } else if (s == "false" || s == "0" || s == "off" || s == "no") {
    out = false;
  } else {
    return "expected true or false";
  }
  return std::nullopt;
}

// `Ref` maps a config to the field it owns; the const getter reuses it.
template <class Ref>
auto& field_of(Ref ref, const ExperimentConfig& c) {
  return ref(const_cast<ExperimentConfig&>(c));
}

template <class Ref>
Field uint_field(std::string key, Ref ref, std::uint64_t min = 0) {
  return Field{
      key,
      [ref, min](ExperimentConfig& c, std::string_view v) -> Error {
        std::uint64_t x = 0;
        if (auto e = parse_uint(v, x)) return e;
        if (x < min) return "must be >= " + std::to_string(min);
        using T = std::remove_reference_t<decltype(ref(c))>;
        if (x > std::numeric_limits<T>::max()) return "value out of range";
        ref(c) = static_cast<T>(x);
        return std::nullopt;
      },
      [ref](const ExperimentConfig& c) {
        return ordered_json(std::uint64_t(field_of(ref, c)));
      }};
}

template <class Ref>
Field bool_field(std::string key, Ref ref) {
  return Field{key,
               [ref](ExperimentConfig& c, std::string_view v) {
                 return parse_bool(v, ref(c));
               },
               [ref](const ExperimentConfig& c) {
                 return ordered_json(bool(field_of(ref, c)));
               }};
}

template <class Ref>
Field double_field(std::string key, Ref ref) {
  return Field{key,
               [ref](ExperimentConfig& c, std::string_view v) {
                 return parse_double(v, ref(c));
               },
               [ref](const ExperimentConfig& c) {
                 return ordered_json(double(field_of(ref, c)));
               }};
}

// Optional workload override; reports the resolved profile value.
template <class T, class Ref, class Resolved>
Field override_field(std::string key, Ref ref, Resolved resolved) {
  return Field{
      key,
      [ref](ExperimentConfig& c, std::string_view v) -> Error {
        if constexpr (std::is_floating_point_v<T>) {
          double x = 0;
          if (auto e = parse_double(v, x)) return e;
          ref(c) = x;
        } else {
          std::uint64_t x = 0;
          if (auto e = parse_uint(v, x)) return e;
          if (x > std::numeric_limits<T>::max()) return "value out of range";
          ref(c) = static_cast<T>(x);
        }
        return std::nullopt;
      },
      [resolved](const ExperimentConfig& c) {
        return ordered_json(resolved(c.profile()));
      }};
}

void timing_fields(std::vector<Field>& f, const std::string& dev,
                   DeviceTiming ExperimentConfig::*m) {
  auto add = [&](const char* name, auto member) {
    f.push_back(uint_field(dev + "." + name,
                           [m, member](ExperimentConfig& c) -> auto& {
                             return (c.*m).*member;
                           }));
  };
  add("tcas", &DeviceTiming::tcas);
  add("trcd", &DeviceTiming::trcd);
  add("trp", &DeviceTiming::trp);
  add("tras", &DeviceTiming::tras);
  add("channels", &DeviceTiming::channels);
  add("bus_width_bits", &DeviceTiming::bus_width_bits);
  add("bus_clock_mhz", &DeviceTiming::bus_clock_mhz);
  add("banks", &DeviceTiming::banks);
  add("row_buffer_bytes", &DeviceTiming::row_buffer_bytes);
  add("cpu_clock_mhz", &DeviceTiming::cpu_clock_mhz);
}

std::vector<Field> build_fields() {
  std::vector<Field> f;
#define REF(expr) [](ExperimentConfig& c) -> auto& { return c.expr; }
  f.push_back(Field{
      "design",
      [](ExperimentConfig& c, std::string_view v) -> Error {
        const auto d = parse_design(v);
        if (!d) return "expected gemini, lh or direct";
        c.controller.design = *d;
        return std::nullopt;
      },
      [](const ExperimentConfig& c) {
        return ordered_json(to_string(c.controller.design));
      }});
  f.push_back(uint_field("seed", REF(controller.seed)));

  f.push_back(uint_field("geometry.block_size", REF(controller.geometry.block_size)));
  {
    // A section is one set's worth of blocks, so it follows the way count.
    Field ways = uint_field("geometry.ways_per_set", REF(controller.geometry.ways_per_set));
    ways.set = [inner = ways.set](ExperimentConfig& c, std::string_view v) {
      Error e = inner(c, v);
      if (!e) c.controller.geometry.section_blocks = c.controller.geometry.ways_per_set;
      return e;
    };
    f.push_back(std::move(ways));
  }
  f.push_back(uint_field("geometry.cache_capacity", REF(controller.geometry.cache_capacity)));
  f.push_back(uint_field("geometry.tag_size", REF(controller.geometry.tag_size)));
  f.push_back(uint_field("geometry.row_size", REF(controller.geometry.row_size)));
  f.push_back(uint_field("lh.ways", REF(controller.lh_ways)));

  timing_fields(f, "cache", &ExperimentConfig::cache);
  timing_fields(f, "memory", &ExperimentConfig::memory);

  f.push_back(uint_field("tag_cache.entries", REF(controller.tag_cache.entries)));
  f.push_back(uint_field("tag_cache.assoc", REF(controller.tag_cache.assoc)));
  f.push_back(uint_field("tag_cache.latency", REF(controller.tag_cache.latency)));

  f.push_back(double_field("policy.p_bypass", REF(controller.p_bypass)));
  f.push_back(bool_field("policy.filter_enabled", REF(controller.policy.filter_enabled)));
  f.push_back(bool_field("policy.reservation_enabled",
                         REF(controller.policy.reservation_enabled)));

  f.push_back(Field{
      "workload.class",
      [](ExperimentConfig& c, std::string_view v) -> Error {
        const auto w = parse_workload_class(v);
        if (!w) return "expected CD, LD, BF or NB";
        c.workload.cls = *w;
        return std::nullopt;
      },
      [](const ExperimentConfig& c) {
        return ordered_json(to_string(c.workload.cls));
      }});
  f.push_back(Field{"workload.trace",
                    [](ExperimentConfig& c, std::string_view v) -> Error {
                      c.workload.trace = std::string(v);
                      return std::nullopt;
                    },
                    [](const ExperimentConfig& c) {
                      return ordered_json(c.workload.trace);
                    }});
  f.push_back(uint_field("workload.records", REF(workload.records)));
  f.push_back(override_field<std::uint64_t>(
      "workload.working_set", REF(workload.working_set),
      [](const WorkloadProfile& p) { return p.working_set; }));
  f.push_back(override_field<std::uint32_t>(
      "workload.burst_len", REF(workload.burst_len),
      [](const WorkloadProfile& p) { return p.burst_len; }));
  f.push_back(override_field<std::uint32_t>(
      "workload.reuse_distance", REF(workload.reuse_distance),
      [](const WorkloadProfile& p) { return p.reuse_distance; }));
  f.push_back(override_field<double>(
      "workload.revisit_prob", REF(workload.revisit_prob),
      [](const WorkloadProfile& p) { return p.revisit_prob; }));
  f.push_back(override_field<double>(
      "workload.alias_prob", REF(workload.alias_prob),
      [](const WorkloadProfile& p) { return p.alias_prob; }));
  f.push_back(override_field<double>(
      "workload.mean_gap", REF(workload.mean_gap),
      [](const WorkloadProfile& p) { return p.mean_gap; }));
  f.push_back(override_field<double>(
      "workload.write_ratio", REF(workload.write_ratio),
      [](const WorkloadProfile& p) { return p.write_ratio; }));
  f.push_back(override_field<std::uint32_t>(
      "workload.cores", REF(workload.cores),
      [](const WorkloadProfile& p) { return p.cores; }));

  f.push_back(Field{"output.path",
                    [](ExperimentConfig& c, std::string_view v) -> Error {
                      c.output_path = std::string(v);
                      return std::nullopt;
                    },
                    [](const ExperimentConfig& c) {
                      return ordered_json(c.output_path);
                    }});
  f.push_back(Field{
      "output.format",
      [](ExperimentConfig& c, std::string_view v) -> Error {
        if (v == "json") {
          c.output_format = OutputFormat::Json;
        } else if (v == "csv") {
          c.output_format = OutputFormat::Csv;
        } else {
          return "expected json or csv";
        }
        return std::nullopt;
      },
      [](const ExperimentConfig& c) {
        return ordered_json(c.output_format == OutputFormat::Csv ? "csv"
                                                                 : "json");
      }});
#undef REF
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = build_fields();
  return f;
}

const Field* find_field(std::string_view key) {
  for (const Field& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    v = v.substr(1, v.size() - 2);
  }
  return std::string(v);
}

void check_timing(const DeviceTiming& t, const std::string& dev,
                  std::vector<std::string>& errs) {
  auto positive = [&](const char* name, std::uint64_t v) {
    if (v == 0) errs.push_back(dev + "." + name + ": must be positive");
  };
  positive("tcas", t.tcas);
  positive("trcd", t.trcd);
  positive("trp", t.trp);
  positive("tras", t.tras);
  positive("channels", t.channels);
  positive("bus_width_bits", t.bus_width_bits);
  positive("bus_clock_mhz", t.bus_clock_mhz);
  positive("banks", t.banks);
  positive("row_buffer_bytes", t.row_buffer_bytes);
  positive("cpu_clock_mhz", t.cpu_clock_mhz);
  if (t.bus_width_bits % 8 != 0) {
    errs.push_back(dev + ".bus_width_bits: must be a multiple of 8");
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const Field& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

std::string env_name(const std::string& key) {
  std::string out = kEnvPrefix;
  for (char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

std::optional<std::string> set_key(ExperimentConfig& cfg,
                                   const std::string& key,
                                   const std::string& value) {
  const Field* f = find_field(key);
  if (!f) return key + ": unknown key";
  if (auto e = f->set(cfg, value)) return key + ": " + *e;
  return std::nullopt;
}

void apply_config_text(ExperimentConfig& cfg, std::istream& in,
                       const std::string& source,
                       std::vector<std::string>& errors) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string_view s(line);
    if (const auto hash = s.find('#'); hash != std::string_view::npos) {
      s = s.substr(0, hash);
    }
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    const std::string where = source + ":" + std::to_string(n) + ": ";
    if (eq == std::string_view::npos) {
      errors.push_back(where + "expected 'section.key = value'");
      continue;
    }
    const std::string key(trim(s.substr(0, eq)));
    if (auto e = set_key(cfg, key, unquote(trim(s.substr(eq + 1))))) {
      errors.push_back(where + *e);
    }
  }
}

void apply_env_overrides(ExperimentConfig& cfg,
                         std::vector<std::string>& errors) {
  const std::string prefix = kEnvPrefix;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view kv(*e);
    if (kv.substr(0, prefix.size()) != prefix) continue;
    const auto eq = kv.find('=');
    const std::string name(kv.substr(0, eq));
    const std::string value(eq == std::string_view::npos ? ""
                                                         : kv.substr(eq + 1));
    const auto& keys = config_keys();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) {
      return env_name(k) == name;
    });
    if (it == keys.end()) {
      errors.push_back(name + ": unknown environment override");
      continue;
    }
    if (auto err = set_key(cfg, *it, value)) {
      errors.push_back(name + " (" + *err + ")");
    }
  }
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> errs;
  const ControllerConfig& c = cfg.controller;
  const CacheGeometry& g = c.geometry;
  for (auto& e : geometry_errors(g)) errs.push_back(e);

  if (c.lh_ways == 0 || c.lh_ways > g.ways_per_set) {
    errs.push_back("lh.ways: must be in [1, geometry.ways_per_set]");
  }
  check_timing(cfg.cache, "cache", errs);
  check_timing(cfg.memory, "memory", errs);
  if (cfg.memory.row_buffer_bytes % g.block_size != 0) {
    errs.push_back("memory.row_buffer_bytes: must be a multiple of the block size");
  }

  const TagCacheConfig& t = c.tag_cache;
  if (t.entries == 0 || t.assoc == 0 || t.entries % t.assoc != 0) {
    errs.push_back("tag_cache.entries: must be a positive multiple of tag_cache.assoc");
  } else if (!std::has_single_bit(t.entries / t.assoc)) {
    errs.push_back("tag_cache.entries: entries / assoc must be a power of two");
  }

  if (!(c.p_bypass >= 0.0 && c.p_bypass <= 1.0)) {
    errs.push_back("policy.p_bypass: must be in [0, 1]");
  }

  if (cfg.workload.trace.empty()) {
    if (cfg.workload.records == 0) {
      errs.push_back("workload.records: must be positive");
    }
    if (geometry_errors(g).empty()) {
      for (auto& e : profile_errors(cfg.profile(), g)) errs.push_back(e);
    }
  }
  return errs;
}

ExperimentConfig load_config(const std::string& path, bool use_env) {
  std::ifstream in(path);
  if (!in) {
    throw std::ios_base::failure("cannot open config '" + path + "'");
  }
  ExperimentConfig cfg;
  std::vector<std::string> errs;
  apply_config_text(cfg, in, path, errs);
  if (use_env) apply_env_overrides(cfg, errs);
  // Keys that failed to parse keep their defaults, so the semantic checks
  // still say something useful about the rest.
  for (auto& e : validate(cfg)) errs.push_back(std::move(e));
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return cfg;
}

ordered_json config_json(const ExperimentConfig& cfg) {
  ordered_json j = ordered_json::object();
  for (const Field& f : fields()) j[f.key] = f.get(cfg);
  return j;
}

void write_config_text(std::ostream& out, const ExperimentConfig& cfg) {
  const ordered_json doc = config_json(cfg);
  for (const auto& [key, v] : doc.items()) {
    out << key << " = ";
    if (v.is_string()) {
      out << v.get<std::string>();
    } else if (v.is_number_float()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
      out << buf;
    } else {
      out << v.dump();
    }
    out << '\n';
  }
}

}  // namespace dcsim
