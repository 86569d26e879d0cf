#include "dcsim/runner.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <tuple>

namespace dcsim {

RecordSource open_workload(const ExperimentConfig& cfg) {
  if (cfg.workload.trace.empty()) {
    auto gen = std::make_shared<TraceGenerator>(cfg.profile(),
                                                cfg.controller.geometry);
    return [gen] { return gen->next(); };
  }

  auto in = std::make_shared<std::ifstream>(cfg.workload.trace,
                                            std::ios::binary);
  if (!*in) {
    throw std::ios_base::failure("cannot open trace '" + cfg.workload.trace +
                                 "'");
  }
  char magic[4] = {};
  in->read(magic, 4);
  const bool binary =
      in->gcount() == 4 && std::memcmp(magic, kBinaryMagic, 4) == 0;
  in->clear();
  in->seekg(0);
  if (binary) {
    auto reader = std::make_shared<BinaryTraceReader>(*in);
    return [in, reader] { return reader->next(); };
  }
  auto reader = std::make_shared<CsvTraceReader>(*in);
  return [in, reader] { return reader->next(); };
}

RunStats simulate(const ExperimentConfig& cfg, const RecordSource& source,
                  const OutcomeSink& tap) {
  TimingEngine engine(cfg.cache, cfg.memory);
  StatsCollector collector;
  auto ctrl = make_controller(
      cfg.controller, engine, [&collector, &tap](const AccessOutcome& o) {
        collector.add(o);
        if (tap) tap(o);
      });

  // Arrivals are pulled one at a time: each arrival event schedules the next,
  // so the trace is never held in memory.
  EventQueue& events = engine.events();
  std::function<void()> feed = [&] {
    const std::optional<TraceRecord> r = source();
    if (!r) return;
    events.schedule(r->cycle, [&, rec = *r] {
      ctrl->access(Request{rec.cycle, rec.op, rec.addr, rec.core});
      feed();
    });
  };
  feed();
  events.run();
  assert(ctrl->outstanding() == 0);

  RunStats s = collector.finish(ctrl->counters(), engine.cache().log(),
                                engine.memory().log());
  s.design = to_string(cfg.controller.design);
  s.workload = cfg.workload.label();
  return s;
}

RunStats run_experiment(const ExperimentConfig& cfg, const OutcomeSink& tap) {
  return simulate(cfg, open_workload(cfg), tap);
}

ExperimentConfig job_config(const ExperimentConfig& base, Design design,
                            const std::string& workload) {
  ExperimentConfig cfg = base;
  cfg.controller.design = design;
  if (const auto cls = parse_workload_class(workload)) {
    cfg.workload.cls = *cls;
    cfg.workload.trace.clear();
  } else {
    cfg.workload.trace = workload;
  }
  return cfg;
}

std::vector<RunStats> sweep(const ExperimentConfig& base,
                            const std::vector<Design>& designs,
                            const std::vector<std::string>& workloads,
                            SweepMode mode) {
  std::vector<ExperimentConfig> jobs;
  for (Design d : designs) {
    for (const std::string& w : workloads) jobs.push_back(job_config(base, d, w));
  }

  std::vector<RunStats> results(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
  const auto n = static_cast<std::int64_t>(jobs.size());

#pragma omp parallel for schedule(dynamic, 1) if (mode == SweepMode::Parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      results[i] = run_experiment(jobs[i]);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::stable_sort(results.begin(), results.end(),
                   [](const RunStats& a, const RunStats& b) {
                     return std::tie(a.design, a.workload) <
                            std::tie(b.design, b.workload);
                   });
  return results;
}

}  // namespace dcsim
