#pragma once

#include <variant>

#include "instboot/game.hpp"
#include "instboot/rng.hpp"

namespace instboot {

// Perception models for the free-riding cost C_f. Each variant maps the
// objective expected sanction to the value a defector acts on.

// Undistorted: perceived cost equals the objective expectation.
struct Identity {};

// Multiplies the objective cost by a constant factor (> 1 overestimates the
// sanction risk, < 1 underestimates it).
struct CoarseBias {
  double factor = 1.0;
};

// Which probability the weighting function is applied to.
enum class PrelecTarget {
  PerCheckProb,       // weight the single-check catch probability N_m / N
  TotalExpectation,   // weight the clamped total probability p_checks * N_m / N
};

// Probability weighting w(q) = exp(-zeta * (-ln q)^lambda): overweights small
// probabilities for lambda < 1, underweights them for lambda > 1, and crosses
// the identity at q = exp(-1) when zeta = 1.
struct Prelec {
  double zeta = 1.0;
  double lambda = 1.0;
  PrelecTarget target = PrelecTarget::PerCheckProb;
};

enum class NoiseScheme {
  TwoSidedUniform,  // fair coin, then uniform on [lo,1] or on [1,hi]
  LogUniform,       // exp(uniform(ln lo, ln hi))
};

// Multiplicative estimation error: perceived = m * objective with random m.
// The two-sided scheme gives under- and over-estimation equal probability
// even when the magnitudes are asymmetric (hi - 1 vs 1 - lo).
struct ProportionalNoise {
  double lo = 1.0;
  double hi = 1.0;
  NoiseScheme scheme = NoiseScheme::TwoSidedUniform;
};

// Additive estimation error: perceived = objective + d, d ~ U[-width, width].
// Negative perceived costs are kept by default so the error stays zero-mean;
// clamp_at_zero floors the result instead.
struct AbsoluteNoise {
  double width = 0.0;
  bool clamp_at_zero = false;
};

using PerceptionSpec =
    std::variant<Identity, CoarseBias, Prelec, ProportionalNoise, AbsoluteNoise>;

// Throws std::domain_error naming the offending parameter.
void validate(const PerceptionSpec& spec);

// True when perceive_freeride_cost consumes random draws for this spec.
// Degenerate noise (lo == hi == 1, width == 0) counts as deterministic.
bool is_stochastic(const PerceptionSpec& spec);

// w(q) = exp(-zeta * (-ln q)^lambda) with w(0) = 0 and w(1) = 1.
// Throws std::domain_error for q outside [0, 1].
double prelec_weight(double q, double zeta, double lambda);

// One multiplier draw for proportional noise (honors the spec's scheme).
double sample_proportional_multiplier(const ProportionalNoise& noise,
                                      SeededRng& rng);

// One offset draw on [-width, width].
double sample_absolute_offset(double width, SeededRng& rng);

// Maps the objective cost true_c_f (with single-check catch probability
// catch_prob) to the perceived cost. Stochastic variants consume draws from
// rng; deterministic variants leave it untouched.
double perceive_freeride_cost(double true_c_f, double catch_prob,
                              const GameParams& params,
                              const PerceptionSpec& spec, SeededRng& rng);

// Convenience for deterministic specs; throws std::invalid_argument if the
// spec is stochastic.
double perceive_freeride_cost(double true_c_f, double catch_prob,
                              const GameParams& params,
                              const PerceptionSpec& spec);

}  // namespace instboot
