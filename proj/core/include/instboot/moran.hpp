#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "instboot/game.hpp"
#include "instboot/perception.hpp"
#include "instboot/replicator.hpp"

namespace instboot {

// Integer population composition for the finite-population process.
struct CountState {
  int k_d = 0;
  int k_c = 0;
  int k_cm = 0;

  int total() const { return k_d + k_c + k_cm; }

  // Validates non-negative counts summing to z; throws std::domain_error.
  static CountState create(int d, int c, int cm, int z);
};

// Monte-Carlo and noise-binding settings for the stochastic layer.
struct MoranConfig {
  // Which draws a noisy perception spec consumes during a simulated run.
  enum class NoiseBinding {
    PerEvaluation,  // fresh draw every time a defector's fitness is evaluated
    PerAgentFixed,  // one draw per agent, fixed for the whole run
  };

  int mc_samples = 1000;
  std::uint64_t seed = 0;
  NoiseBinding noise_binding = NoiseBinding::PerEvaluation;

  void validate() const;  // throws std::domain_error
};

// Imitation probability 1 / (1 + exp(-gamma * (f_model - f_focal))),
// evaluated without overflow for any argument.
double fermi_probability(double f_model, double f_focal, double gamma);

struct FitnessVector {
  double f_d = 0.0;
  double f_c = 0.0;
  double f_cm = 0.0;
};

// Strategy fitnesses at an integer composition. Group size for the payoff
// ratios is the population itself (z_pop). A noisy spec consumes one draw for
// the defector fitness; deterministic specs consume none.
FitnessVector fitness_vector(const CountState& counts, const GameParams& params,
                             const PerceptionSpec& spec, SeededRng& rng);

// One-step switch probabilities between ordered strategy pairs.
struct TransitionRates {
  // rate[from][to]; diagonal entries stay zero.
  std::array<std::array<double, 3>, 3> rate{};

  double outgoing(Strategy from) const;
  double net_flow(Strategy into) const;  // inflow minus outflow
};

// rate[j -> i] = (k_j / Z) * ((1 - mu) * (k_i / (Z - 1)) * fermi(f_i, f_j)
//                             + mu / 2).
// For noisy specs the Fermi factor is a Monte-Carlo average over
// config.mc_samples independent perceived-cost draws (fresh draws for each
// side of the comparison that involves a defector); deterministic specs are
// evaluated exactly and consume no draws.
TransitionRates transition_rates(const CountState& counts,
                                 const GameParams& params,
                                 const PerceptionSpec& spec,
                                 const MoranConfig& config, SeededRng& rng);

// Expected one-step change of each strategy count (net probability flow),
// using a stream derived from config.seed.
std::array<double, 3> selection_gradient(const CountState& counts,
                                         const GameParams& params,
                                         const PerceptionSpec& spec,
                                         const MoranConfig& config);

// Expected-motion analogue of the continuous gradient field, evaluated on
// count states nearest the simplex lattice. Each state gets an independent
// stream derived from config.seed, so repeated calls are identical.
GradientField drift_field(const GameParams& params, const PerceptionSpec& spec,
                          const MoranConfig& config, int resolution);

// Samples the chain step-by-step: pick a focal agent by composition; with
// probability mu it adopts one of the other two strategies uniformly,
// otherwise it imitates a random other agent with the Fermi probability.
// Event sampling matches the marginal transition_rates distribution exactly.
// Returns the visited states including the start (n_steps + 1 entries).
std::vector<CountState> simulate(const CountState& start, const GameParams& params,
                                 const PerceptionSpec& spec,
                                 const MoranConfig& config, long n_steps,
                                 SeededRng& rng);

// Full one-step transition matrix over all (z+1)(z+2)/2 compositions.
struct TransitionMatrix {
  int z_pop = 0;
  std::vector<CountState> states;  // canonical enumeration order
  // Sparse rows: (column index, probability), including the self-loop.
  std::vector<std::vector<std::pair<int, double>>> rows;

  int index_of(const CountState& counts) const;
};

// Builds the chain for z_pop <= 100 (the state count grows quadratically);
// larger populations are rejected with std::domain_error.
TransitionMatrix transition_matrix(const GameParams& params,
                                   const PerceptionSpec& spec,
                                   const MoranConfig& config);

struct StationaryResult {
  std::vector<double> pi;
  double residual = 0.0;  // max-norm of pi*P - pi at exit
  long iterations = 0;
  bool converged = false;
};

// Power iteration from the uniform vector until the max-norm residual drops
// below 1e-12 (or the iteration budget runs out, reported via `converged`).
StationaryResult stationary_distribution(const TransitionMatrix& matrix);

}  // namespace instboot
