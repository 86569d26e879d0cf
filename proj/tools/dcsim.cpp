// dcsim command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 config error, 3 I/O or trace error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dcsim/runner.hpp"

namespace {

using namespace dcsim;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Common {
  std::string config;
  std::string out;
  std::string format;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  std::vector<std::string> errs;
  if (c.seed) cfg.controller.seed = *c.seed;
  if (!c.out.empty()) cfg.output_path = c.out;
  if (!c.format.empty()) {
    if (auto e = set_key(cfg, "output.format", c.format)) errs.push_back(*e);
  }
  if (!errs.empty()) throw ConfigError(errs);
  return cfg;
}

// Writes to the configured path, or stdout when it is empty.
void write_output(const ExperimentConfig& cfg, const std::string& text) {
  if (cfg.output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.output_path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) {
    throw std::ios_base::failure("cannot write '" + cfg.output_path + "'");
  }
}

std::string render(const ExperimentConfig& cfg,
                   const std::vector<RunStats>& runs,
                   const std::vector<ExperimentConfig>& configs, bool single) {
  std::ostringstream os;
  if (cfg.output_format == OutputFormat::Csv) {
    write_csv_header(os, runs.front());
    for (const RunStats& s : runs) write_csv_row(os, s);
    return os.str();
  }
  if (single) {
    os << result_document(runs.front(), config_json(configs.front())).dump(2);
  } else {
    nlohmann::ordered_json doc;
    doc["schema"] = kSchemaVersion;
    doc["runs"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      doc["runs"].push_back({{"stats", to_json(runs[i])},
                             {"config", config_json(configs[i])}});
    }
    os << doc.dump(2);
  }
  os << '\n';
  return os.str();
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "config file")->required();
  sub->add_option("--out", c.out, "output path (default stdout)");
  sub->add_option("--format", c.format, "json or csv");
  sub->add_option("--seed", c.seed, "random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven die-stacked DRAM cache simulator"};
  app.require_subcommand(1);

  Common run_opts;
  std::string run_design, run_workload;
  auto* run = app.add_subcommand("run", "simulate one design on one workload");
  add_common(run, run_opts);
  run->add_option("--design", run_design, "gemini, lh or direct");
  run->add_option("--workload", run_workload, "class (CD, LD, BF, NB) or trace path");

  Common sweep_opts;
  std::string sweep_designs = "direct,gemini,lh", sweep_workloads = "CD,LD,BF,NB";
  bool serial = false;
  auto* sw = app.add_subcommand("sweep", "every design x workload pair");
  add_common(sw, sweep_opts);
  sw->add_option("--designs", sweep_designs, "comma-separated designs");
  sw->add_option("--workloads", sweep_workloads, "comma-separated workloads");
  sw->add_flag("--serial", serial, "run jobs one at a time");

  Common gen_opts;
  std::string gen_workload;
  std::optional<std::uint64_t> gen_records;
  bool binary = false;
  auto* gen = app.add_subcommand("generate", "write a synthetic trace");
  add_common(gen, gen_opts);
  gen->add_option("--workload", gen_workload, "class: CD, LD, BF or NB");
  gen->add_option("--records", gen_records, "record count");
  gen->add_flag("--binary", binary, "fixed-width binary instead of CSV");

  std::string validate_path;
  bool dump = false;
  auto* val = app.add_subcommand("validate", "check a config and report every error");
  val->add_option("--config", validate_path, "config file")->required();
  val->add_flag("--dump", dump, "print the resolved config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*val) {
      const ExperimentConfig cfg = load_config(validate_path);
      if (dump) write_config_text(std::cout, cfg);
      std::cerr << "ok\n";
      return 0;
    }

    if (*run) {
      ExperimentConfig cfg = load(run_opts);
      std::vector<std::string> errs;
      if (!run_design.empty()) {
        if (auto e = set_key(cfg, "design", run_design)) errs.push_back(*e);
      }
      if (!errs.empty()) throw ConfigError(errs);
      if (!run_workload.empty()) {
        cfg = job_config(cfg, cfg.controller.design, run_workload);
      }
      if (auto v = validate(cfg); !v.empty()) throw ConfigError(v);
      const RunStats s = run_experiment(cfg);
      write_output(cfg, render(cfg, {s}, {cfg}, true));
      return 0;
    }

    if (*sw) {
      const ExperimentConfig cfg = load(sweep_opts);
      std::vector<Design> designs;
      std::vector<std::string> errs;
      for (const auto& d : split(sweep_designs)) {
        if (const auto p = parse_design(d)) {
          designs.push_back(*p);
        } else {
          errs.push_back("--designs: unknown design '" + d + "'");
        }
      }
      const auto workloads = split(sweep_workloads);
      if (designs.empty()) errs.push_back("--designs: empty list");
      if (workloads.empty()) errs.push_back("--workloads: empty list");
      if (!errs.empty()) throw ConfigError(errs);

      const auto runs = sweep(cfg, designs, workloads,
                              serial ? SweepMode::Serial : SweepMode::Parallel);
      // Configs in the same (design, workload) order as the sorted results.
      std::vector<ExperimentConfig> configs;
      for (const RunStats& s : runs) {
        const Design d = *parse_design(s.design);
        for (const auto& w : workloads) {
          ExperimentConfig c = job_config(cfg, d, w);
          if (c.workload.label() == s.workload) {
            configs.push_back(c);
            break;
          }
        }
      }
      write_output(cfg, render(cfg, runs, configs, false));
      return 0;
    }

    if (*gen) {
      ExperimentConfig cfg = load(gen_opts);
      if (!gen_workload.empty()) {
        if (auto e = set_key(cfg, "workload.class", gen_workload)) {
          throw ConfigError({*e});
        }
      }
      if (gen_records) cfg.workload.records = *gen_records;
      if (auto v = validate(cfg); !v.empty()) throw ConfigError(v);

      std::ofstream file;
      std::ostream* out = &std::cout;
      if (!cfg.output_path.empty()) {
        file.open(cfg.output_path, std::ios::binary);
        if (!file) {
          throw std::ios_base::failure("cannot write '" + cfg.output_path + "'");
        }
        out = &file;
      }
      TraceGenerator g(cfg.profile(), cfg.controller.geometry);
      binary ? write_binary_header(*out) : write_csv_header(*out);
      while (auto r = g.next()) {
        binary ? write_binary_record(*out, *r) : write_csv_record(*out, *r);
      }
      if (!out->flush()) throw std::ios_base::failure("write failed");
      return 0;
    }
  } catch (const ConfigError& e) {
    for (const auto& msg : e.errors()) std::cerr << "config error: " << msg << '\n';
    return kExitConfig;
  } catch (const TraceError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
