#include "instboot/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace instboot {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::domain_error(message);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Defector: return "defector";
    case Strategy::Contributor: return "contributor";
    case Strategy::ContributorMonitor: return "contributor_monitor";
  }
  return "unknown";
}

void GameParams::validate() const {
  require(finite(alpha) && alpha >= 0.0, "GameParams.alpha must be >= 0");
  require(finite(beta) && beta >= 0.0 && beta <= 1.0,
          "GameParams.beta must lie in [0, 1]");
  require(finite(delta) && delta >= 0.0, "GameParams.delta must be >= 0");
  require(finite(p_checks) && p_checks >= 0.0,
          "GameParams.p_checks must be >= 0");
  require(finite(s) && s >= 0.0, "GameParams.s must be >= 0");
  require(n_group >= 1, "GameParams.n_group must be >= 1");
  require(z_pop >= 2, "GameParams.z_pop must be >= 2");
  require(finite(gamma) && gamma >= 0.0, "GameParams.gamma must be >= 0");
  require(finite(mu) && mu >= 0.0 && mu <= 1.0,
          "GameParams.mu must lie in [0, 1]");
}

GameParams GameParams::favourable() { return GameParams{}; }

GameParams GameParams::unfavourable() {
  GameParams p;
  p.delta = 0.5;
  return p;
}

GameParams GameParams::with_group_size(int n) const {
  GameParams copy = *this;
  copy.n_group = n;
  return copy;
}

PopulationState PopulationState::from_counts(double d, double c_only, double cm) {
  require(finite(d) && d >= 0.0, "PopulationState: defector count must be >= 0");
  require(finite(c_only) && c_only >= 0.0,
          "PopulationState: contributor count must be >= 0");
  require(finite(cm) && cm >= 0.0, "PopulationState: monitor count must be >= 0");
  require(d + c_only + cm > 0.0, "PopulationState: population must be non-empty");
  return PopulationState{d, c_only, cm};
}

PopulationState PopulationState::from_frequencies(double x_d, double x_c,
                                                  double x_cm, int n) {
  require(n >= 1, "PopulationState: n must be >= 1");
  const double sum = x_d + x_c + x_cm;
  require(finite(sum) && std::abs(sum - 1.0) <= 1e-9,
          "PopulationState: frequencies must sum to 1");
  require(x_d >= -1e-12 && x_c >= -1e-12 && x_cm >= -1e-12,
          "PopulationState: frequencies must be non-negative");
  const double scale = static_cast<double>(n);
  return PopulationState{std::max(x_d, 0.0) * scale, std::max(x_c, 0.0) * scale,
                         std::max(x_cm, 0.0) * scale};
}

double benefit_group(const GameParams& params, const PopulationState& state) {
  const double n = static_cast<double>(params.n_group);
  return (1.0 - params.beta) * params.alpha * state.n_contrib() / n;
}

double benefit_monitor(const GameParams& params, const PopulationState& state) {
  const double mon = state.n_mon();
  if (mon <= 0.0) return 0.0;
  return params.alpha * params.beta * state.n_contrib() / mon;
}

double cost_monitoring(const GameParams& params) {
  return params.p_checks * params.delta;
}

double catch_probability(const GameParams& params, const PopulationState& state) {
  const double n = static_cast<double>(params.n_group);
  const double q = state.n_mon() / n;
  return q < 0.0 ? 0.0 : (q > 1.0 ? 1.0 : q);
}

double expected_freeride_cost(const GameParams& params,
                              const PopulationState& state) {
  return params.p_checks * catch_probability(params, state) * params.s;
}

PayoffVector payoff_vector(const GameParams& params, const PopulationState& state,
                           double perceived_c_f) {
  const double b_g = benefit_group(params, state);
  const double b_m = benefit_monitor(params, state);
  const double c_m = cost_monitoring(params);
  PayoffVector u;
  u.u_d = b_g - perceived_c_f;
  u.u_c = b_g - params.alpha;
  u.u_cm = b_g - params.alpha + b_m - c_m;
  return u;
}

PayoffBreakdown payoff_breakdown(const GameParams& params,
                                 const PopulationState& state,
                                 double perceived_c_f) {
  PayoffBreakdown b;
  b.b_g = benefit_group(params, state);
  b.c_c = params.alpha;
  b.b_m = benefit_monitor(params, state);
  b.c_m = cost_monitoring(params);
  b.c_f = expected_freeride_cost(params, state);
  b.utilities = payoff_vector(params, state, perceived_c_f);
  return b;
}

}  // namespace instboot
