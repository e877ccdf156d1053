#pragma once

#include <array>
#include <complex>
#include <vector>

#include "instboot/game.hpp"
#include "instboot/perception.hpp"

namespace instboot {

// Point on the 3-strategy frequency simplex.
struct FrequencyVector {
  double x_d = 0.0;
  double x_c = 0.0;
  double x_cm = 0.0;

  // Validates non-negativity and sum == 1 (tolerance 1e-9); throws
  // std::domain_error otherwise.
  static FrequencyVector create(double x_d, double x_c, double x_cm);
  // Clips negatives to zero and renormalizes; requires a positive sum.
  static FrequencyVector normalized(double x_d, double x_c, double x_cm);

  std::array<double, 3> as_array() const { return {x_d, x_c, x_cm}; }
};

enum class Stability { Stable, Unstable, Saddle, Nonhyperbolic };

const char* to_string(Stability s);

struct FixedPoint {
  FrequencyVector location;
  // Eigenvalues of the flow linearized within the simplex tangent plane.
  std::array<std::complex<double>, 2> eigenvalues;
  Stability stability = Stability::Nonhyperbolic;
};

struct FixedPointSearch {
  std::vector<FixedPoint> points;
  // Search seeds whose refinement failed; reported rather than dropped.
  std::vector<FrequencyVector> non_converged;
};

struct GradientField {
  int resolution = 0;
  std::vector<FrequencyVector> points;
  std::vector<std::array<double, 3>> vectors;
};

// Frequency growth rates x_i * (u_i - mean utility). Deterministic perception
// specs only; throws std::invalid_argument for stochastic ones.
std::array<double, 3> replicator_derivative(const FrequencyVector& x,
                                            const GameParams& params,
                                            const PerceptionSpec& spec);

// Same growth law applied to explicit utilities; useful for checking
// properties that hold for any payoff assignment (e.g. translation
// invariance).
std::array<double, 3> replicator_drift_from_payoffs(const FrequencyVector& x,
                                                    const PayoffVector& u);

// Fixed-step RK4 integration, renormalizing onto the simplex after each step.
// Returns the full path including x0 (n_steps + 1 entries).
std::vector<FrequencyVector> integrate_trajectory(const FrequencyVector& x0,
                                                  const GameParams& params,
                                                  const PerceptionSpec& spec,
                                                  double step, long n_steps);

// Drift vectors on the simplex lattice {(i, j, r-i-j)/r}; row-major in
// (i = defector index outer, j = contributor index inner), giving
// (r+1)(r+2)/2 points.
GradientField gradient_field(const GameParams& params, const PerceptionSpec& spec,
                             int resolution);

// Multi-start damped Newton refinement over a seed lattice plus the three
// vertices (always fixed points of the growth law). Roots are deduplicated
// within 1e-6 and classified via classify_fixed_point.
FixedPointSearch find_fixed_points(const GameParams& params,
                                   const PerceptionSpec& spec,
                                   int seed_resolution = 20, double tol = 1e-8);

// Eigenvalues of the 2x2 Jacobian of the flow in (x_c, x_cm) coordinates,
// estimated with central differences (step 1e-6).
std::array<std::complex<double>, 2> tangent_jacobian_eigenvalues(
    const FrequencyVector& x, const GameParams& params,
    const PerceptionSpec& spec);

// Stable: all real parts < -tol. Unstable: all > tol. Saddle: opposite
// signs. Nonhyperbolic: any |real part| <= tol.
Stability classify_fixed_point(const FrequencyVector& x, const GameParams& params,
                               const PerceptionSpec& spec, double tol = 1e-8);

}  // namespace instboot
