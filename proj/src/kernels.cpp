#include "snnforge/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace snnforge {

namespace {

void check_batch(const SnnModel& model, const Dataset& data) {
  if (data.rows() == 0) throw DataError("empty batch");
  if (data.cols() != model.n) {
    throw ConfigError("dataset width " + std::to_string(data.cols()) +
                      " does not match model n = " + std::to_string(model.n));
  }
}

// Output and per-sample gradient contribution for one row, accumulated into
// `grad` (particle layout order). `hidden` is scratch of size m.
inline double row_forward(const SnnModel& model, const double* x,
                          double* hidden) {
  const std::size_t n = model.n, m = model.m;
  double out = model.output_bias;
  for (std::size_t i = 0; i < m; ++i) {
    double z = model.hidden_biases[i];
    const double* w = model.hidden_weights.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) z += w[j] * x[j];
    hidden[i] = sigmoid(z);
    out += model.output_weights[i] * hidden[i];
  }
  return sigmoid(out);
}

inline double row_backward(const SnnModel& model, const double* x, int label,
                           double* hidden, double* grad) {
  const std::size_t n = model.n, m = model.m;
  const double o = row_forward(model, x, hidden);
  const double delta_out = (o - static_cast<double>(label)) * o * (1.0 - o);
  for (std::size_t i = 0; i < m; ++i) {
    const double delta_i =
        delta_out * model.output_weights[i] * hidden[i] * (1.0 - hidden[i]);
    double* g = grad + i * (n + 1);
    for (std::size_t j = 0; j < n; ++j) g[j] += delta_i * x[j];
    g[n] += delta_i;  // hidden bias
  }
  double* gy = grad + m * (n + 1);
  for (std::size_t i = 0; i < m; ++i) gy[i] += delta_out * hidden[i];
  gy[m] += delta_out;  // output bias
  return o;
}

}  // namespace

void batch_outputs_serial(const SnnModel& model, const Dataset& data,
                          std::vector<double>& out) {
  check_batch(model, data);
  const std::size_t rows = data.rows();
  out.assign(rows, 0.0);
  std::vector<double> hidden(model.m);
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = row_forward(model, data.row(r), hidden.data());
  }
}

void batch_outputs(const SnnModel& model, const Dataset& data,
                   std::vector<double>& out) {
  check_batch(model, data);
  const std::size_t rows = data.rows();
  out.assign(rows, 0.0);
#pragma omp parallel
  {
    std::vector<double> hidden(model.m);
#pragma omp for schedule(static)
    for (long long r = 0; r < static_cast<long long>(rows); ++r) {
      out[static_cast<std::size_t>(r)] =
          row_forward(model, data.row(static_cast<std::size_t>(r)), hidden.data());
    }
  }
}

ForwardBackward forward_backward_serial(const SnnModel& model,
                                        const Dataset& data) {
  check_batch(model, data);
  const std::size_t rows = data.rows();
  const std::size_t d = model.parameter_count();
  ForwardBackward fb;
  fb.outputs.assign(rows, 0.0);
  fb.gradient.assign(d, 0.0);
  std::vector<double> hidden(model.m);
  for (std::size_t r = 0; r < rows; ++r) {
    fb.outputs[r] = row_backward(model, data.row(r), data.labels[r],
                                 hidden.data(), fb.gradient.data());
  }
  return fb;
}

ForwardBackward forward_backward(const SnnModel& model, const Dataset& data) {
  check_batch(model, data);
  const std::size_t rows = data.rows();
  const std::size_t d = model.parameter_count();
  const std::size_t blocks = (rows + kGradientBlock - 1) / kGradientBlock;

  ForwardBackward fb;
  fb.outputs.assign(rows, 0.0);
  fb.gradient.assign(d, 0.0);
  std::vector<double> partials(blocks * d, 0.0);

#pragma omp parallel
  {
    std::vector<double> hidden(model.m);
#pragma omp for schedule(static)
    for (long long b = 0; b < static_cast<long long>(blocks); ++b) {
      const std::size_t lo = static_cast<std::size_t>(b) * kGradientBlock;
      const std::size_t hi = std::min(rows, lo + kGradientBlock);
      double* grad = partials.data() + static_cast<std::size_t>(b) * d;
      for (std::size_t r = lo; r < hi; ++r) {
        fb.outputs[r] = row_backward(model, data.row(r), data.labels[r],
                                     hidden.data(), grad);
      }
    }
  }
  // Sequential reduce in block order; results do not depend on thread count.
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* src = partials.data() + b * d;
    for (std::size_t k = 0; k < d; ++k) fb.gradient[k] += src[k];
  }
  return fb;
}

std::vector<double> gradients(const SnnModel& model, const Dataset& data) {
  return forward_backward(model, data).gradient;
}

double driver_fitness(const SnnModel& model, const Dataset& data,
                      Driver driver, double threshold) {
  check_batch(model, data);
  const std::size_t rows = data.rows();
  std::vector<double> hidden(model.m);
  if (driver == Driver::Err) {
    double sum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double diff = row_forward(model, data.row(r), hidden.data()) -
                          static_cast<double>(data.labels[r]);
      sum += diff * diff;
    }
    return -(0.5 * sum / static_cast<double>(rows));  // maximization
  }
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const bool predicted =
        row_forward(model, data.row(r), hidden.data()) >= threshold;
    if (data.labels[r] == 1) {
      predicted ? ++tp : ++fn;
    } else {
      predicted ? ++fp : ++tn;
    }
  }
  if (driver == Driver::Acc) {
    return static_cast<double>(tp + tn) / static_cast<double>(rows);
  }
  const double tpr =
      (tp + fn == 0) ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double prec =
      (tp + fp == 0) ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  return (prec + tpr == 0.0) ? 0.0 : 2.0 * prec * tpr / (prec + tpr);
}

void swarm_fitness_serial(const std::vector<double>& positions,
                          std::size_t dim, std::size_t population,
                          std::size_t n, std::size_t m, const Dataset& data,
                          Driver driver, double threshold,
                          std::vector<double>& fitness) {
  fitness.assign(population, 0.0);
  for (std::size_t i = 0; i < population; ++i) {
    ParticleVector v(std::vector<double>(positions.begin() + i * dim,
                                         positions.begin() + (i + 1) * dim));
    fitness[i] = driver_fitness(decode_particle(v, n, m), data, driver, threshold);
  }
}

void swarm_fitness(const std::vector<double>& positions, std::size_t dim,
                   std::size_t population, std::size_t n, std::size_t m,
                   const Dataset& data, Driver driver, double threshold,
                   std::vector<double>& fitness) {
  fitness.assign(population, 0.0);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(population); ++i) {
    const std::size_t p = static_cast<std::size_t>(i);
    ParticleVector v(std::vector<double>(positions.begin() + p * dim,
                                         positions.begin() + (p + 1) * dim));
    fitness[p] = driver_fitness(decode_particle(v, n, m), data, driver, threshold);
  }
}

}  // namespace snnforge
