#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "instboot/attractor.hpp"
#include "instboot/game.hpp"
#include "instboot/moran.hpp"
#include "instboot/perception.hpp"
#include "instboot/replicator.hpp"

namespace instboot {

// Locale-independent decimal rendering with 17 significant digits (enough to
// round-trip any double), used by all CSV and SVG output so identical runs
// produce identical bytes.
std::string format_double17(double value);

// --- GameParams ---------------------------------------------------------
// JSON object with keys alpha, beta, delta, p_checks, s, n_group, z_pop,
// gamma, mu. Readers accept any subset (missing keys keep the base value)
// and reject unknown keys by name.

std::string params_to_json(const GameParams& params);
void apply_params_json(GameParams& base, const std::string& text);
GameParams params_from_json(const std::string& text);  // over defaults, validated

// --- PerceptionSpec ------------------------------------------------------
// Tagged JSON ({"kind": "prelec", "zeta": 1.0, ...}) and a compact
// colon-separated shorthand (identity, coarse:1.5, prelec:1.0:0.8,
// propnoise:0.25:4, absnoise:8).

std::string spec_to_json(const PerceptionSpec& spec);
PerceptionSpec spec_from_json(const std::string& text);
std::string spec_to_shorthand(const PerceptionSpec& spec);
PerceptionSpec spec_from_shorthand(const std::string& text);
// Accepts either form: shorthand, or JSON when the string starts with '{'.
PerceptionSpec spec_from_string(const std::string& text);

// --- RunConfig -----------------------------------------------------------

struct RunConfig {
  GameParams params;
  PerceptionSpec perception = Identity{};
  std::uint64_t seed = 0;
  int resolution = 50;
  int mc_samples = 1000;
  long steps = 10000;
};

std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& text);

// --- Analysis outputs ----------------------------------------------------
// Every writer terminates its output with a newline.

// Header x_d,x_c,x_cm,dx_d,dx_c,dx_cm; with sampling metadata the columns
// samples,seed are appended (Monte-Carlo drift fields).
struct FieldSampling {
  int samples = 0;
  std::uint64_t seed = 0;
};
std::string field_to_csv(const GradientField& field,
                         const std::optional<FieldSampling>& sampling = {});
std::string field_to_json(const GradientField& field,
                          const std::optional<FieldSampling>& sampling = {});

std::string fixed_points_to_json(const FixedPointSearch& search);

// Header x_d,x_c,x_cm,label.
std::string basin_to_csv(const BasinReport& report);
std::string basin_summary_to_json(const BasinReport& report);

std::string threshold_to_json(const ThresholdReport& report);
// One JSON object per line.
std::string threshold_sweep_to_json_lines(
    const std::vector<ThresholdReport>& reports);

// Header step,k_d,k_c,k_cm.
std::string trajectory_to_csv(const std::vector<CountState>& path);

// Header k_d,k_c,k_cm,probability (canonical state order).
std::string stationary_to_csv(const TransitionMatrix& matrix,
                              const StationaryResult& result);
std::string stationary_to_json(const TransitionMatrix& matrix,
                               const StationaryResult& result);

// Dense row-stochastic matrix; '#'-prefixed legend lines map row/column
// indices to compositions.
std::string matrix_to_csv(const TransitionMatrix& matrix);
std::string matrix_to_json(const TransitionMatrix& matrix);

}  // namespace instboot
