#include "snnforge/pdbp.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "snnforge/kernels.hpp"
#include "snnforge/rng.hpp"

namespace snnforge {

void PdbpConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (tolerance && *tolerance < 1) throw ConfigError("tolerance must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(init_range > 0.0)) throw ConfigError("init_range must be > 0");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("threshold must lie in (0,1)");
  }
}

const KpiReport& TrainedResult::report_at_best() const {
  if (best_iteration == 0 || best_iteration > trace.size()) {
    return final_report;
  }
  return trace[best_iteration - 1].report;
}

namespace {

bool improves(Driver driver, double perf, double best) {
  return driver == Driver::Err ? perf < best : perf > best;
}

void check_labels(const Dataset& data) {
  for (int y : data.labels) {
    if (y != 0 && y != 1) throw DataError("labels must be binary");
  }
}

bool finite_params(const std::vector<double>& params) {
  for (double v : params) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

PdbpStep pdbp_step(const SnnModel& model, const Dataset& data,
                   double learning_rate, double threshold) {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  ForwardBackward fb = forward_backward(model, data);
  PdbpStep step;
  step.report = kpi_suite(data.labels, fb.outputs, threshold);
  ParticleVector params = encode_particle(model);
  for (std::size_t k = 0; k < params.size(); ++k) {
    params[k] -= learning_rate * fb.gradient[k];
  }
  step.model = decode_particle(params, model.n, model.m);
  return step;
}

TrainedResult train_pdbp(const Dataset& data, std::size_t m,
                         const PdbpConfig& config) {
  config.validate();
  check_labels(data);
  if (data.rows() == 0) throw DataError("empty training set");
  const std::size_t n = data.cols();
  const std::size_t d = dimension_count(n, m);
  const std::size_t tau = config.resolved_tolerance(d);

  const auto t0 = std::chrono::steady_clock::now();

  Rng rng(config.seed);
  ParticleVector params;
  params.values.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    params[k] = rng.uniform(-config.init_range, config.init_range);
  }
  SnnModel model = decode_particle(params, n, m);

  TrainedResult result;
  result.trace.reserve(std::min<std::size_t>(config.max_iterations, 1 << 16));
  double best = config.driver == Driver::Err
                    ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
  std::size_t stall = 0;
  std::size_t t = 0;
  result.stop_reason = StopReason::MaxIterations;

  while (t < config.max_iterations) {
    // Forward pass, gradient, weight update; the iteration's KPIs come from
    // the same outputs that produced the gradient.
    ForwardBackward fb = forward_backward(model, data);
    for (std::size_t k = 0; k < d; ++k) {
      params[k] -= config.learning_rate * fb.gradient[k];
    }
    if (!finite_params(params.values)) throw DivergedError(t + 1);
    model = decode_particle(params, n, m);

    KpiReport report = kpi_suite(data.labels, fb.outputs, config.threshold);
    const double perf = report.driver_value(config.driver);
    result.trace.push_back({t + 1, perf, report});

    if (improves(config.driver, perf, best)) {
      best = perf;
      stall = 0;
      result.best_iteration = t + 1;
    } else {
      ++stall;
      if (stall > tau) {
        result.stop_reason = StopReason::Stall;
        ++t;
        break;
      }
    }
    ++t;
  }

  result.iterations_run = result.trace.size();
  result.model = model;
  std::vector<double> outputs;
  batch_outputs(model, data, outputs);
  result.final_report = kpi_suite(data.labels, outputs, config.threshold);
  result.train_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

std::string trace_to_csv(const std::vector<TraceRecord>& trace,
                         bool with_fitness) {
  std::string out = with_fitness
                        ? "iteration,gsbest_fitness,err,acc,f1,auc,tpr,tnr\n"
                        : "iteration,err,acc,f1,auc,tpr,tnr\n";
  char buf[256];
  for (const auto& rec : trace) {
    const KpiReport& r = rec.report;
    if (with_fitness) {
      std::snprintf(buf, sizeof(buf),
                    "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    rec.iteration, rec.fitness, r.err, r.acc, r.f1, r.auc,
                    r.tpr, r.tnr);
    } else {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    rec.iteration, r.err, r.acc, r.f1, r.auc, r.tpr, r.tnr);
    }
    out += buf;
  }
  return out;
}

}  // namespace snnforge
