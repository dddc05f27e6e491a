#include "snnforge/snn_model.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

namespace snnforge {

double sigmoid(double z) {
  // Branch on sign so the exponential argument is always <= 0.
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::size_t dimension_count(std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) {
    throw ConfigError("dimension_count requires n >= 1 and m >= 1");
  }
  return m * (n + 2) + 1;
}

SnnModel SnnModel::zeros(std::size_t n, std::size_t m) {
  dimension_count(n, m);  // validates
  SnnModel model;
  model.n = n;
  model.m = m;
  model.hidden_weights.assign(m * n, 0.0);
  model.hidden_biases.assign(m, 0.0);
  model.output_weights.assign(m, 0.0);
  model.output_bias = 0.0;
  return model;
}

bool SnnModel::all_finite() const {
  auto ok = [](double v) { return std::isfinite(v); };
  for (double v : hidden_weights)
    if (!ok(v)) return false;
  for (double v : hidden_biases)
    if (!ok(v)) return false;
  for (double v : output_weights)
    if (!ok(v)) return false;
  return ok(output_bias);
}

ParticleVector encode_particle(const SnnModel& model) {
  ParticleVector v;
  v.values.reserve(model.parameter_count());
  for (std::size_t i = 0; i < model.m; ++i) {
    for (std::size_t j = 0; j < model.n; ++j) {
      v.values.push_back(model.hidden_weights[i * model.n + j]);
    }
    v.values.push_back(model.hidden_biases[i]);
  }
  for (std::size_t i = 0; i < model.m; ++i) {
    v.values.push_back(model.output_weights[i]);
  }
  v.values.push_back(model.output_bias);
  return v;
}

SnnModel decode_particle(const ParticleVector& v, std::size_t n, std::size_t m) {
  const std::size_t d = dimension_count(n, m);
  if (v.size() != d) {
    throw ConfigError("particle length " + std::to_string(v.size()) +
                      " does not match dimension_count(" + std::to_string(n) +
                      "," + std::to_string(m) + ") = " + std::to_string(d));
  }
  SnnModel model = SnnModel::zeros(n, m);
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      model.hidden_weights[i * n + j] = v[k++];
    }
    model.hidden_biases[i] = v[k++];
  }
  for (std::size_t i = 0; i < m; ++i) {
    model.output_weights[i] = v[k++];
  }
  model.output_bias = v[k++];
  return model;
}

double feedforward(const SnnModel& model, const double* x, std::size_t len) {
  if (len != model.n) {
    throw ConfigError("feedforward input length " + std::to_string(len) +
                      " does not match n = " + std::to_string(model.n));
  }
  double out = model.output_bias;
  for (std::size_t i = 0; i < model.m; ++i) {
    double z = model.hidden_biases[i];
    const double* w = model.hidden_weights.data() + i * model.n;
    for (std::size_t j = 0; j < model.n; ++j) {
      z += w[j] * x[j];
    }
    out += model.output_weights[i] * sigmoid(z);
  }
  return sigmoid(out);
}

double feedforward(const SnnModel& model, const std::vector<double>& x) {
  return feedforward(model, x.data(), x.size());
}

std::string model_to_json(const SnnModel& model) {
  nlohmann::json j;
  j["layout_version"] = 1;
  j["n"] = model.n;
  j["m"] = model.m;
  j["params"] = encode_particle(model).values;
  return j.dump(2);
}

SnnModel model_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("n") || !j.contains("m") || !j.contains("params")) {
    throw DataError("model JSON must contain n, m and params");
  }
  ParticleVector v(j["params"].get<std::vector<double>>());
  return decode_particle(v, j["n"].get<std::size_t>(), j["m"].get<std::size_t>());
}

}  // namespace snnforge
