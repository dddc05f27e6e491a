#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "snnforge/errors.hpp"

namespace snnforge {

// Overflow-safe logistic 1/(1+e^-z). Strictly monotone, result in (0,1)
// mathematically; saturates to 0.0/1.0 in double precision for |z| > ~37.
double sigmoid(double z);

// Scalar parameter count of a single-hidden-layer network:
// m*(n+1) hidden weights and biases, m output weights, one output bias,
// i.e. d = m*(n+2)+1. Rejects n == 0 or m == 0.
std::size_t dimension_count(std::size_t n, std::size_t m);

// Single-hidden-layer sigmoid network with one output neuron.
struct SnnModel {
  std::size_t n = 0;  // input attributes
  std::size_t m = 0;  // hidden neurons
  std::vector<double> hidden_weights;  // m rows x n cols, row-major
  std::vector<double> hidden_biases;   // m
  std::vector<double> output_weights;  // m
  double output_bias = 0.0;

  static SnnModel zeros(std::size_t n, std::size_t m);

  std::size_t parameter_count() const { return dimension_count(n, m); }
  bool all_finite() const;
};

// Flat view of an SnnModel's parameters. Layout is row-major over the weight
// matrix: for each hidden neuron i its input weights w_i1..w_in then bias
// b_i, then the output weights w_y1..w_ym, then the output bias b_y.
struct ParticleVector {
  std::vector<double> values;

  ParticleVector() = default;
  explicit ParticleVector(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

ParticleVector encode_particle(const SnnModel& model);

// Inverse of encode_particle. Throws ConfigError when v.size() does not
// equal dimension_count(n, m).
SnnModel decode_particle(const ParticleVector& v, std::size_t n, std::size_t m);

// o = sigmoid(b_y + sum_i w_yi * sigmoid(b_i + sum_j w_ij * x_j)).
double feedforward(const SnnModel& model, const double* x, std::size_t len);
double feedforward(const SnnModel& model, const std::vector<double>& x);

// JSON persistence: {"layout_version":1,"n":..,"m":..,"params":[..]} with
// params in particle layout order. Values round-trip exactly.
std::string model_to_json(const SnnModel& model);
SnnModel model_from_json(const std::string& text);

}  // namespace snnforge
