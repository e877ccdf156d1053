#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "instboot/game.hpp"
#include "instboot/moran.hpp"
#include "instboot/perception.hpp"
#include "instboot/replicator.hpp"

namespace instboot {

enum class BasinLabel { Defection, Cooperative, Unresolved };

const char* to_string(BasinLabel label);

enum class BasinDynamics { Replicator, MoranExpectedMotion };

const char* to_string(BasinDynamics dynamics);

struct BasinOptions {
  double step = 0.05;            // replicator integrator step size
  long max_steps = 60000;        // per-cell step budget
  double attractor_tol = 1e-4;   // early-stop distance to a stable attractor
  int mc_samples = 1000;         // drift averaging draws for noisy specs
  std::uint64_t seed = 0;
};

struct BasinReport {
  BasinDynamics dynamics = BasinDynamics::Replicator;
  int resolution = 0;
  std::uint64_t seed = 0;
  int mc_samples = 0;
  std::vector<FrequencyVector> cells;
  std::vector<BasinLabel> labels;
  double fraction_defection = 0.0;
  double fraction_cooperative = 0.0;
  double fraction_unresolved = 0.0;
};

// Labels every simplex lattice cell by the attractor its forward orbit
// reaches. A cell is resolved only when the orbit comes within attractor_tol
// of a classified stable rest point (Defection for the all-defector corner,
// Cooperative for defector-free attractors); orbits that stall elsewhere or
// exhaust the budget stay Unresolved, so saddle points and neutral boundary
// points never inflate a basin. Replicator dynamics require a deterministic
// spec; the expected-motion variant also accepts noisy specs and then labels
// defector-free stalls Cooperative only if the flow re-attracts after a kick
// toward the defector corner.
BasinReport basin_map(const GameParams& params, const PerceptionSpec& spec,
                      int resolution, BasinDynamics dynamics,
                      const BasinOptions& options = {});

struct ThresholdOptions {
  int mc_samples = 10000;  // drift averaging draws for noisy specs
  std::uint64_t seed = 0;
  double tol = 1e-9;       // bisection interval width at exit
};

struct ThresholdReport {
  PerceptionSpec spec;
  // Monitor fraction on the defector/monitor edge above which defection
  // stops paying; empty when the drift does not change sign inside (0, 1).
  std::optional<double> m_star;
  std::string method;  // "bisection-exact" or "bisection-monte-carlo"
  std::optional<std::string> error;
};

// Critical monitor mass on the defector/monitor edge. Deterministic specs
// bisect the exact payoff difference; noisy specs bisect the sign of the
// Monte-Carlo averaged drift's defector component, reusing one frozen draw
// set across all bisection points so the result is deterministic per seed.
ThresholdReport edge_threshold(const GameParams& params,
                               const PerceptionSpec& spec,
                               const ThresholdOptions& options = {});

// edge_threshold over several specs with the same options (and therefore the
// same frozen draws, keeping noisy thresholds comparable). A failing spec
// yields a report with `error` set instead of aborting the sweep.
std::vector<ThresholdReport> threshold_sweep(
    const GameParams& params, const std::vector<PerceptionSpec>& specs,
    const ThresholdOptions& options = {});

using StartRegion = std::function<bool(const CountState&)>;

// Compositions with a defector share strictly above min_fraction_d.
StartRegion defection_corner_region(double min_fraction_d = 0.9);

// Fraction of sampled-chain runs that start inside start_region (uniform over
// its compositions) and push the defector share below 10% within `horizon`
// steps. Runs use independent streams derived from config.seed.
double basin_escape_rate(const GameParams& params, const PerceptionSpec& spec,
                         const MoranConfig& config,
                         const StartRegion& start_region, long horizon,
                         int n_runs);

}  // namespace instboot
