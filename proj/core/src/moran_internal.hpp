#pragma once

// Shared building blocks for the finite-population layer and the analyses
// built on top of it (expected-motion basins, threshold bisection). These
// operate on real-valued compositions so callers can evaluate drift between
// integer states, and they separate noise sampling ("tokens") from payoff
// evaluation so common-random-number schemes can reuse one draw set.

#include <span>

#include "instboot/game.hpp"
#include "instboot/moran.hpp"
#include "instboot/perception.hpp"

namespace instboot::detail {

struct BasePayoffs {
  double b_g = 0.0;      // pool share common to every strategy
  double f_c = 0.0;      // contributor fitness
  double f_cm = 0.0;     // monitor fitness
  double true_c_f = 0.0; // objective sanction expectation
  double q = 0.0;        // single-check catch probability
};

// Payoff components at a (possibly fractional) composition summing to
// params.z_pop; params must already carry n_group == z_pop.
BasePayoffs base_payoffs(double k_d, double k_c, double k_cm,
                         const GameParams& params);

// One raw noise draw for the spec: a multiplier for proportional noise, an
// offset for absolute noise, 0 for deterministic specs (unused).
double sample_noise_token(const PerceptionSpec& spec, SeededRng& rng);

// The draw-free token for the spec's family: 1 for multipliers, 0 for
// offsets and for specs that carry no token at all.
double neutral_noise_token(const PerceptionSpec& spec);

// Defector fitness with the perceived cost reconstructed from a raw token
// (ignored for deterministic specs).
double defector_fitness(const BasePayoffs& base, const GameParams& params,
                        const PerceptionSpec& spec, double token);

// Average switch-rate matrix at a real-valued composition. Deterministic
// specs are evaluated exactly and ignore `tokens`; stochastic specs average
// the Fermi factors over the supplied token set (the same set serves both
// comparison directions, which leaves each marginal average unbiased while
// keeping differences smooth across nearby compositions).
TransitionRates rates_from_tokens(double k_d, double k_c, double k_cm,
                                  const GameParams& params,
                                  const PerceptionSpec& spec,
                                  std::span<const double> tokens);

inline std::array<double, 3> net_flows(const TransitionRates& r) {
  return {r.net_flow(Strategy::Defector), r.net_flow(Strategy::Contributor),
          r.net_flow(Strategy::ContributorMonitor)};
}

// One chain step in place (per-evaluation noise binding). params must already
// carry n_group == z_pop and counts must sum to z_pop.
void advance_chain(CountState& counts, const GameParams& params,
                   const PerceptionSpec& spec, SeededRng& rng);

}  // namespace instboot::detail
