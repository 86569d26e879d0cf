#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dcsim/config.hpp"
#include "dcsim/metrics.hpp"

namespace dcsim {

using RecordSource = std::function<std::optional<TraceRecord>()>;

/// Generator or trace file (CSV, or binary when it starts with the magic).
/// Throws std::ios_base::failure if the trace cannot be opened.
RecordSource open_workload(const ExperimentConfig& cfg);

/// Replays `source` through the configured design until every request has
/// completed. `tap` sees each outcome after the stats collector does.
RunStats simulate(const ExperimentConfig& cfg, const RecordSource& source,
                  const OutcomeSink& tap = {});

RunStats run_experiment(const ExperimentConfig& cfg,
                        const OutcomeSink& tap = {});

/// `workload` is a class name (CD, LD, BF, NB) or a trace path.
ExperimentConfig job_config(const ExperimentConfig& base, Design design,
                            const std::string& workload);

enum class SweepMode { Serial, Parallel };

/// Every design x workload pair, sorted by (design, workload). Parallel mode
/// runs jobs on OpenMP threads; output is identical to serial mode.
std::vector<RunStats> sweep(const ExperimentConfig& base,
                            const std::vector<Design>& designs,
                            const std::vector<std::string>& workloads,
                            SweepMode mode = SweepMode::Parallel);

}  // namespace dcsim
