#include "snnforge/vpso.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "snnforge/kernels.hpp"

namespace snnforge {

void VpsoConfig::validate(std::size_t d) const {
  if (!(c1 + c2 > 4.0)) {
    throw ConfigError("constriction requires C1 + C2 > 4");
  }
  if (resolved_population(d) < 3) {
    throw ConfigError("ring topology requires a population of at least 3");
  }
  if (resolved_reorder_period(d) < 1) {
    throw ConfigError("reorder period must be >= 1");
  }
  if (resolved_tolerance(d) < 1) throw ConfigError("tolerance must be >= 1");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("threshold must lie in (0,1)");
  }
  if (!(inertia_max >= inertia_min)) {
    throw ConfigError("inertia_max must be >= inertia_min");
  }
  if (!(mass_epsilon > 0.0)) throw ConfigError("mass_epsilon must be > 0");
}

double constriction(double c1, double c2) {
  const double phi = c1 + c2;
  if (!(phi > 4.0)) {
    throw ConfigError("constriction undefined for C1 + C2 = " +
                      std::to_string(phi) + " (needs > 4)");
  }
  return std::fabs(2.0 / (2.0 - phi - std::sqrt(phi * (phi - 4.0))));
}

double mass(double fitness_i, double best, double worst, double eps) {
  return (fitness_i - worst + eps) / (best - worst + eps);
}

double adaptive_inertia(double mass_i, double inertia_max, double inertia_min) {
  const double e = std::exp(mass_i);
  return inertia_max - 2.164 * (inertia_max - inertia_min) * (e - 1.0) / (e + 1.0);
}

std::pair<std::size_t, std::size_t> ring_neighbors(
    std::size_t i, const std::vector<std::size_t>& order) {
  const std::size_t n = order.size();
  std::size_t slot = n;
  for (std::size_t s = 0; s < n; ++s) {
    if (order[s] == i) {
      slot = s;
      break;
    }
  }
  if (slot == n) throw ConfigError("particle index not present in ring order");
  return {order[(slot + n - 1) % n], order[(slot + 1) % n]};
}

void update_sbest_gsbest(SwarmState& s) {
  const std::size_t n = s.population, d = s.dim;
  // Current-fitness neighborhood max against each particle's own history.
  std::vector<double> new_vals(n);
  std::vector<std::size_t> new_src(n);  // particle whose position is taken
  for (std::size_t slot = 0; slot < n; ++slot) {
    const std::size_t self = s.ring[slot];
    const std::size_t left = s.ring[(slot + n - 1) % n];
    const std::size_t right = s.ring[(slot + 1) % n];
    std::size_t argmax = self;
    for (std::size_t cand : {left, right}) {
      if (s.fitness[cand] > s.fitness[argmax]) argmax = cand;
    }
    new_vals[self] = s.fitness[argmax];
    new_src[self] = argmax;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (new_vals[i] > s.sbest_values[i]) {
      s.sbest_values[i] = new_vals[i];
      std::copy_n(s.positions.begin() + new_src[i] * d, d,
                  s.sbest_positions.begin() + i * d);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (s.sbest_values[i] > s.gsbest_value) {
      s.gsbest_value = s.sbest_values[i];
      std::copy_n(s.sbest_positions.begin() + i * d, d, s.gsbest_position.begin());
    }
  }
}

double update_velocity(double v, double p, double sbest_p, double gsbest_p,
                       double omega, double chi, double c1, double c2,
                       double r1, double r2) {
  const double out = chi * (omega * v + c1 * r1 * (sbest_p - p) +
                            c2 * r2 * (gsbest_p - p));
  return std::clamp(out, -1.0, 1.0);
}

std::pair<double, double> apply_position_update_and_repair(double p, double v,
                                                           Rng& rng) {
  double next = p + v;
  if (next > 1.0 || next < -1.0) {
    next = rng.uniform(-1.0, 1.0);
    return {next, 0.1 * next};
  }
  return {next, v};
}

namespace {

void check_labels(const Dataset& data) {
  for (int y : data.labels) {
    if (y != 0 && y != 1) throw DataError("labels must be binary");
  }
}

KpiReport incumbent_report(const std::vector<double>& position, std::size_t n,
                           std::size_t m, const Dataset& data,
                           double threshold) {
  const SnnModel model = decode_particle(ParticleVector(position), n, m);
  std::vector<double> outputs;
  batch_outputs(model, data, outputs);
  return kpi_suite(data.labels, outputs, threshold);
}

}  // namespace

TrainedResult optimize_vpso(const Dataset& data, std::size_t m,
                            const VpsoConfig& config,
                            const SwarmObserver& observer) {
  check_labels(data);
  if (data.rows() == 0) throw DataError("empty training set");
  const std::size_t n = data.cols();
  const std::size_t d = dimension_count(n, m);
  config.validate(d);
  const std::size_t pop = config.resolved_population(d);
  const std::size_t gamma = config.resolved_tolerance(d);
  const std::size_t period = config.resolved_reorder_period(d);
  const double chi = constriction(config.c1, config.c2);

  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(config.seed);

  SwarmState s;
  s.dim = d;
  s.population = pop;
  s.positions.resize(pop * d);
  s.velocities.resize(pop * d);
  for (double& p : s.positions) p = rng.uniform(-1.0, 1.0);
  for (double& v : s.velocities) v = rng.uniform(-0.1, 0.1);
  s.fitness.assign(pop, 0.0);
  s.masses.assign(pop, 0.0);
  s.inertias.assign(pop, 0.0);
  s.sbest_values.assign(pop, -std::numeric_limits<double>::infinity());
  s.sbest_positions.assign(pop * d, 0.0);
  s.gsbest_value = -std::numeric_limits<double>::infinity();
  s.gsbest_position.assign(d, 0.0);
  s.ring.resize(pop);
  std::iota(s.ring.begin(), s.ring.end(), std::size_t{0});

  TrainedResult result;
  result.stop_reason = StopReason::MaxIterations;
  KpiReport incumbent;
  std::size_t stall = 0;
  std::size_t t = 0;

  while (t < config.max_iterations) {
    swarm_fitness(s.positions, d, pop, n, m, data, config.driver,
                  config.threshold, s.fitness);
    for (double f : s.fitness) {
      if (!std::isfinite(f)) throw DivergedError(t + 1);
    }
    const double prev_gsbest = s.gsbest_value;
    update_sbest_gsbest(s);
    if (s.gsbest_value > prev_gsbest) {
      stall = 0;
      result.best_iteration = t + 1;
      incumbent = incumbent_report(s.gsbest_position, n, m, data, config.threshold);
    } else {
      ++stall;
    }
    result.trace.push_back({t + 1, s.gsbest_value, incumbent});

    if (stall >= gamma) {
      result.stop_reason = StopReason::Stall;
      ++t;
      break;
    }
    ++t;

    if (t % period == 0) rng.shuffle(s.ring);

    const double best = *std::max_element(s.fitness.begin(), s.fitness.end());
    const double worst = *std::min_element(s.fitness.begin(), s.fitness.end());
    for (std::size_t i = 0; i < pop; ++i) {
      s.masses[i] = mass(s.fitness[i], best, worst, config.mass_epsilon);
      s.inertias[i] = adaptive_inertia(s.masses[i], config.inertia_max,
                                       config.inertia_min);
    }
    for (std::size_t i = 0; i < pop; ++i) {
      double* v = s.velocities.data() + i * d;
      const double* p = s.positions.data() + i * d;
      const double* sb = s.sbest_positions.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) {
        const double r1 = rng.unit_open_low();
        const double r2 = rng.unit_open_low();
        v[j] = update_velocity(v[j], p[j], sb[j], s.gsbest_position[j],
                               s.inertias[i], chi, config.c1, config.c2, r1, r2);
      }
    }
    for (std::size_t i = 0; i < pop; ++i) {
      double* p = s.positions.data() + i * d;
      double* v = s.velocities.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) {
        const auto [np, nv] = apply_position_update_and_repair(p[j], v[j], rng);
        p[j] = np;
        v[j] = nv;
      }
    }
    s.iteration = t;
    if (observer) observer(s);
  }

  result.iterations_run = result.trace.size();
  result.model = decode_particle(ParticleVector(s.gsbest_position), n, m);
  result.final_report = incumbent;
  result.train_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

TrainedResult optimize_standard_pso(const Dataset& data, std::size_t m,
                                    const VpsoConfig& config) {
  check_labels(data);
  if (data.rows() == 0) throw DataError("empty training set");
  const std::size_t n = data.cols();
  const std::size_t d = dimension_count(n, m);
  config.validate(d);
  const std::size_t pop = config.resolved_population(d);
  const std::size_t gamma = config.resolved_tolerance(d);

  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(config.seed);

  std::vector<double> positions(pop * d), velocities(pop * d);
  for (double& p : positions) p = rng.uniform(-1.0, 1.0);
  for (double& v : velocities) v = rng.uniform(-0.1, 0.1);
  std::vector<double> fitness(pop);
  std::vector<double> pbest_values(pop, -std::numeric_limits<double>::infinity());
  std::vector<double> pbest_positions(pop * d, 0.0);
  double gbest_value = -std::numeric_limits<double>::infinity();
  std::vector<double> gbest_position(d, 0.0);

  TrainedResult result;
  result.stop_reason = StopReason::MaxIterations;
  KpiReport incumbent;
  std::size_t stall = 0;
  std::size_t t = 0;
  // Linearly decreasing inertia between the conventional bounds.
  const double span = static_cast<double>(std::max<std::size_t>(config.max_iterations - 1, 1));

  while (t < config.max_iterations) {
    swarm_fitness(positions, d, pop, n, m, data, config.driver,
                  config.threshold, fitness);
    for (std::size_t i = 0; i < pop; ++i) {
      if (fitness[i] > pbest_values[i]) {
        pbest_values[i] = fitness[i];
        std::copy_n(positions.begin() + i * d, d, pbest_positions.begin() + i * d);
      }
    }
    const double prev = gbest_value;
    for (std::size_t i = 0; i < pop; ++i) {
      if (pbest_values[i] > gbest_value) {
        gbest_value = pbest_values[i];
        std::copy_n(pbest_positions.begin() + i * d, d, gbest_position.begin());
      }
    }
    if (gbest_value > prev) {
      stall = 0;
      result.best_iteration = t + 1;
      incumbent = incumbent_report(gbest_position, n, m, data, config.threshold);
    } else {
      ++stall;
    }
    result.trace.push_back({t + 1, gbest_value, incumbent});
    if (stall >= gamma) {
      result.stop_reason = StopReason::Stall;
      ++t;
      break;
    }
    ++t;

    const double omega =
        config.inertia_max -
        (config.inertia_max - config.inertia_min) * static_cast<double>(t - 1) / span;
    for (std::size_t i = 0; i < pop; ++i) {
      double* v = velocities.data() + i * d;
      double* p = positions.data() + i * d;
      const double* pb = pbest_positions.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) {
        const double r1 = rng.unit_open_low();
        const double r2 = rng.unit_open_low();
        v[j] = std::clamp(omega * v[j] + config.c1 * r1 * (pb[j] - p[j]) +
                              config.c2 * r2 * (gbest_position[j] - p[j]),
                          -1.0, 1.0);
        const auto [np, nv] = apply_position_update_and_repair(p[j], v[j], rng);
        p[j] = np;
        v[j] = nv;
      }
    }
  }

  result.iterations_run = result.trace.size();
  result.model = decode_particle(ParticleVector(gbest_position), n, m);
  result.final_report = incumbent;
  result.train_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

}  // namespace snnforge
