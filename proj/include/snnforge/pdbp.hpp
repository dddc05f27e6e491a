#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snnforge/dataset.hpp"
#include "snnforge/metrics.hpp"
#include "snnforge/snn_model.hpp"

namespace snnforge {

struct PdbpConfig {
  Driver driver = Driver::Acc;
  std::size_t max_iterations = 20000;
  std::optional<std::size_t> tolerance;  // stall tolerance tau; default 20*d
  double learning_rate = 0.05;
  double init_range = 0.5;  // weights start uniform in [-init_range, +init_range]
  double threshold = 0.5;   // classification threshold theta_y
  std::uint64_t seed = 0;

  std::size_t resolved_tolerance(std::size_t d) const {
    return tolerance ? *tolerance : 20 * d;
  }
  void validate() const;
};

struct TraceRecord {
  std::size_t iteration = 0;  // 1-based
  double fitness = 0.0;       // PDBP: driver value; VPSO: gsBest fitness
  KpiReport report;
};

enum class StopReason { Stall, MaxIterations };

struct TrainedResult {
  SnnModel model;                  // state when training stopped
  std::size_t best_iteration = 0;  // I: last driver improvement, 0 if none
  std::size_t iterations_run = 0;
  double train_time_ms = 0.0;
  StopReason stop_reason = StopReason::MaxIterations;
  std::vector<TraceRecord> trace;  // one record per iteration
  KpiReport final_report;          // training-set KPIs of `model`

  // Trace record at iteration I (the row reported in summary tables).
  const KpiReport& report_at_best() const;
};

// One full-batch gradient step. The returned report is computed from the
// outputs of the incoming model, i.e. the same forward pass that produced
// the gradient.
struct PdbpStep {
  SnnModel model;
  KpiReport report;
};
PdbpStep pdbp_step(const SnnModel& model, const Dataset& data,
                   double learning_rate, double threshold);

// Full-batch gradient descent whose stall/stop bookkeeping tracks the
// configured driver: ACC/F1 improve on strictly greater values, ERR on
// strictly smaller ones. Stops when the stall counter exceeds tau or at
// max_iterations. Deterministic given (seed, data, config).
TrainedResult train_pdbp(const Dataset& data, std::size_t m,
                         const PdbpConfig& config);

// Trace CSV; VPSO traces carry the extra gsbest_fitness column.
std::string trace_to_csv(const std::vector<TraceRecord>& trace,
                         bool with_fitness);

}  // namespace snnforge
