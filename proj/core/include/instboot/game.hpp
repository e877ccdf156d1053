#pragma once

namespace instboot {

enum class Strategy { Defector = 0, Contributor = 1, ContributorMonitor = 2 };

inline constexpr int kStrategyCount = 3;

const char* to_string(Strategy s);

// Model parameters. Payoff formulas read alpha..n_group; the Moran layer adds
// z_pop (population size), gamma (selection intensity) and mu (mutation rate).
struct GameParams {
  double alpha = 1.0;    // contribution cost, also scales the shared pool
  double beta = 0.2;     // fraction of the pool diverted to monitors
  double delta = 0.1;    // cost a monitor pays per check
  double p_checks = 5.0; // checks each monitor performs
  double s = 1.0;        // sanction applied to a caught defector
  int n_group = 20;      // group size used inside the payoff ratios
  int z_pop = 40;        // finite-population size for the Moran layer
  double gamma = 1.0;    // imitation selection intensity
  double mu = 1e-3;      // per-step mutation probability

  // Throws std::domain_error naming the offending field.
  void validate() const;

  // Regime where monitoring sustains itself (low per-check cost).
  static GameParams favourable();
  // Regime where monitoring costs exceed what the pool share repays.
  static GameParams unfavourable();

  GameParams with_group_size(int n) const;
};

// Real-valued population composition. Fractional occupancy is allowed so the
// continuous dynamics can evaluate payoffs between lattice points.
struct PopulationState {
  double n_d = 0.0;       // defectors
  double n_c_only = 0.0;  // contributors that do not monitor
  double n_cm = 0.0;      // contributors that also monitor

  double n_contrib() const { return n_c_only + n_cm; }
  double n_mon() const { return n_cm; }
  double total() const { return n_d + n_c_only + n_cm; }

  // Throws std::domain_error on negative counts or an empty population.
  static PopulationState from_counts(double d, double c_only, double cm);
  // Frequencies scaled to a population of n; validates the simplex.
  static PopulationState from_frequencies(double x_d, double x_c, double x_cm,
                                          int n);
};

struct PayoffVector {
  double u_d = 0.0;
  double u_c = 0.0;
  double u_cm = 0.0;
};

struct PayoffBreakdown {
  double b_g = 0.0;  // per-capita share of the public pool
  double c_c = 0.0;  // contribution cost
  double b_m = 0.0;  // per-monitor share of the diverted pool
  double c_m = 0.0;  // total checking cost per monitor
  double c_f = 0.0;  // expected sanction on a defector
  PayoffVector utilities;
};

// Per-capita pool share after the monitor cut: (1-beta) * alpha * N_c / N.
double benefit_group(const GameParams& params, const PopulationState& state);

// Diverted pool split among monitors: alpha * beta * N_c / N_m; zero when no
// monitors exist (nothing is diverted without anyone checking).
double benefit_monitor(const GameParams& params, const PopulationState& state);

// Total checking cost per monitor: p_checks * delta.
double cost_monitoring(const GameParams& params);

// Probability a given defector is inspected on one check: N_m / N, in [0,1].
double catch_probability(const GameParams& params, const PopulationState& state);

// Expected sanction on a defector: p_checks * (N_m / N) * s.
double expected_freeride_cost(const GameParams& params,
                              const PopulationState& state);

// Strategy utilities given an already-perceived free-riding cost, so callers
// can substitute a distorted estimate for the objective one.
PayoffVector payoff_vector(const GameParams& params, const PopulationState& state,
                           double perceived_c_f);

PayoffBreakdown payoff_breakdown(const GameParams& params,
                                 const PopulationState& state,
                                 double perceived_c_f);

}  // namespace instboot
