#pragma once

#include <cstddef>
#include <vector>

#include "snnforge/dataset.hpp"
#include "snnforge/metrics.hpp"
#include "snnforge/snn_model.hpp"

namespace snnforge {

// Batch kernels behind PDBP and VPSO. Each has an OpenMP version (the
// production path) and a serial reference used by tests and the benchmark.
// The parallel versions are bit-identical across thread counts: per-sample
// outputs are independent, and gradient accumulation runs over fixed 64-row
// blocks that are reduced in block order.

inline constexpr std::size_t kGradientBlock = 64;

// Network output for every row.
void batch_outputs(const SnnModel& model, const Dataset& data,
                   std::vector<double>& out);
void batch_outputs_serial(const SnnModel& model, const Dataset& data,
                          std::vector<double>& out);

struct ForwardBackward {
  std::vector<double> outputs;   // per row
  std::vector<double> gradient;  // dE/dtheta, particle layout order
};

// One fused pass computing outputs and the gradient of
// E = 1/2 * sum_i (o_i - y_i)^2 over the whole batch.
ForwardBackward forward_backward(const SnnModel& model, const Dataset& data);
ForwardBackward forward_backward_serial(const SnnModel& model,
                                        const Dataset& data);

// Spec'd gradient entry point; gradient only, particle layout order.
std::vector<double> gradients(const SnnModel& model, const Dataset& data);

// Driver metric of one candidate model over the whole set, in maximization
// orientation (ERR is negated). Streams per sample; no score buffer.
double driver_fitness(const SnnModel& model, const Dataset& data,
                      Driver driver, double threshold);

// Fitness of every particle in a flat population x dim position array.
// Parallel over particles; each evaluation is pure.
void swarm_fitness(const std::vector<double>& positions, std::size_t dim,
                   std::size_t population, std::size_t n, std::size_t m,
                   const Dataset& data, Driver driver, double threshold,
                   std::vector<double>& fitness);
void swarm_fitness_serial(const std::vector<double>& positions,
                          std::size_t dim, std::size_t population,
                          std::size_t n, std::size_t m, const Dataset& data,
                          Driver driver, double threshold,
                          std::vector<double>& fitness);

}  // namespace snnforge
