#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "snnforge/dataset.hpp"
#include "snnforge/metrics.hpp"
#include "snnforge/pdbp.hpp"
#include "snnforge/rng.hpp"
#include "snnforge/snn_model.hpp"

namespace snnforge {

struct VpsoConfig {
  Driver driver = Driver::Acc;
  std::optional<std::size_t> population;      // N_pop, default 2d
  std::size_t max_iterations = 20000;
  std::optional<std::size_t> tolerance;       // Gamma, default 20d
  std::optional<std::size_t> reorder_period;  // T, default 10d
  double c1 = 2.05, c2 = 2.05;
  double inertia_max = 0.9, inertia_min = 0.4;
  double mass_epsilon = 0.001;
  double threshold = 0.5;
  std::uint64_t seed = 0;

  std::size_t resolved_population(std::size_t d) const {
    return population ? *population : 2 * d;
  }
  std::size_t resolved_tolerance(std::size_t d) const {
    return tolerance ? *tolerance : 20 * d;
  }
  std::size_t resolved_reorder_period(std::size_t d) const {
    return reorder_period ? *reorder_period : 10 * d;
  }
  void validate(std::size_t d) const;
};

// Clerc constriction factor chi = |2 / (2 - phi - sqrt(phi*(phi-4)))| with
// phi = c1 + c2. Requires phi > 4.
double constriction(double c1, double c2);

// Normalized fitness standing in (0, 1]; best/worst are the current swarm
// extremes in maximization orientation, eps keeps it defined when they meet.
double mass(double fitness_i, double best, double worst, double eps);

// omega = w_max - 2.164*(w_max - w_min)*(e^mass - 1)/(e^mass + 1); decreases
// from w_max toward w_min as mass goes 0 -> 1.
double adaptive_inertia(double mass_i, double inertia_max, double inertia_min);

// Neighbors of particle i in the circular ring described by `order`
// (order[slot] = particle index). Returns particle indices.
std::pair<std::size_t, std::size_t> ring_neighbors(
    std::size_t i, const std::vector<std::size_t>& order);

struct SwarmState {
  std::size_t dim = 0;
  std::size_t population = 0;
  std::size_t iteration = 0;           // completed iterations
  std::vector<double> positions;       // population x dim, in [-1,1]
  std::vector<double> velocities;      // population x dim, in [-1,1]
  std::vector<double> fitness;         // maximization orientation
  std::vector<double> masses;
  std::vector<double> inertias;
  std::vector<double> sbest_values;
  std::vector<double> sbest_positions;  // population x dim
  double gsbest_value = 0.0;
  std::vector<double> gsbest_position;
  std::vector<std::size_t> ring;  // ring[slot] = particle index

  double pos(std::size_t i, std::size_t j) const { return positions[i * dim + j]; }
  double vel(std::size_t i, std::size_t j) const { return velocities[i * dim + j]; }
};

// sBest_i(t) = max(f_left, f_i, f_right, sBest_i(t-1)) over the current
// ring; gsBest(t) = max over all sBest_i(t) and gsBest(t-1). Positions are
// recorded alongside values.
void update_sbest_gsbest(SwarmState& s);

// v' = chi*(omega*v + c1*r1*(sbest_p - p) + c2*r2*(gsbest_p - p)),
// clamped to [-1, 1].
double update_velocity(double v, double p, double sbest_p, double gsbest_p,
                       double omega, double chi, double c1, double c2,
                       double r1, double r2);

// p' = p + v; out-of-box components are resampled uniformly in [-1,1] and
// the velocity becomes 0.1 times the fresh position.
std::pair<double, double> apply_position_update_and_repair(double p, double v,
                                                           Rng& rng);

// Called once per iteration after positions were updated; used by tests to
// watch invariants without touching the run's determinism.
using SwarmObserver = std::function<void(const SwarmState&)>;

// Swarm search over flat weight vectors in [-1,1]^d with constriction,
// per-particle mass-adaptive inertia, ring-neighborhood bests and periodic
// ring reshuffles. Returns the decoded gsBest as the model. Deterministic
// given (seed, data, config) regardless of the OpenMP thread count.
TrainedResult optimize_vpso(const Dataset& data, std::size_t m,
                            const VpsoConfig& config,
                            const SwarmObserver& observer = {});

// Plain inertia-weight PSO with personal/global bests and no constriction,
// mass adaption or ring. Reference mode kept for tests that contrast the
// variant's behavior.
TrainedResult optimize_standard_pso(const Dataset& data, std::size_t m,
                                    const VpsoConfig& config);

}  // namespace snnforge
