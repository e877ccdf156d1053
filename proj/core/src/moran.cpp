#include "instboot/moran.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "instboot/parallel.hpp"
#include "moran_internal.hpp"

namespace instboot {

namespace detail {

BasePayoffs base_payoffs(double k_d, double k_c, double k_cm,
                         const GameParams& params) {
  PopulationState state;
  state.n_d = std::max(k_d, 0.0);
  state.n_c_only = std::max(k_c, 0.0);
  state.n_cm = std::max(k_cm, 0.0);
  BasePayoffs base;
  base.b_g = benefit_group(params, state);
  base.q = catch_probability(params, state);
  base.true_c_f = expected_freeride_cost(params, state);
  const double b_m = benefit_monitor(params, state);
  base.f_c = base.b_g - params.alpha;
  base.f_cm = base.b_g - params.alpha + b_m - cost_monitoring(params);
  return base;
}

double sample_noise_token(const PerceptionSpec& spec, SeededRng& rng) {
  if (const auto* prop = std::get_if<ProportionalNoise>(&spec)) {
    return sample_proportional_multiplier(*prop, rng);
  }
  if (const auto* abs = std::get_if<AbsoluteNoise>(&spec)) {
    return sample_absolute_offset(abs->width, rng);
  }
  return 0.0;
}

double neutral_noise_token(const PerceptionSpec& spec) {
  // The identity element of each noise family: a multiplier of 1, an offset
  // of 0. Degenerate noise specs must evaluate through this, not through 0.
  return std::holds_alternative<ProportionalNoise>(spec) ? 1.0 : 0.0;
}

double defector_fitness(const BasePayoffs& base, const GameParams& params,
                        const PerceptionSpec& spec, double token) {
  if (const auto* prop = std::get_if<ProportionalNoise>(&spec)) {
    (void)prop;
    return base.b_g - token * base.true_c_f;
  }
  if (const auto* abs = std::get_if<AbsoluteNoise>(&spec)) {
    double perceived = base.true_c_f + token;
    if (abs->clamp_at_zero) perceived = std::max(perceived, 0.0);
    return base.b_g - perceived;
  }
  return base.b_g -
         perceive_freeride_cost(base.true_c_f, base.q, params, spec);
}

void advance_chain(CountState& counts, const GameParams& params,
                   const PerceptionSpec& spec, SeededRng& rng) {
  const int z = params.z_pop;
  const double zd = static_cast<double>(z);
  const bool noisy = is_stochastic(spec);

  const int k[3] = {counts.k_d, counts.k_c, counts.k_cm};
  const double pick = rng.uniform01() * zd;
  int focal = 0;
  double cum = k[0];
  while (focal < 2 && pick >= cum) cum += k[++focal];

  int adopted = focal;
  if (params.mu > 0.0 && rng.uniform01() < params.mu) {
    adopted = (focal + 1 + static_cast<int>(rng.below(2))) % 3;
  } else {
    const double pick_model = rng.uniform01() * (zd - 1.0);
    int model = 0;
    double cum_model = k[0] - (focal == 0 ? 1 : 0);
    while (model < 2 && pick_model >= cum_model) {
      ++model;
      cum_model += k[model] - (focal == model ? 1 : 0);
    }
    if (model != focal) {
      const auto base = base_payoffs(counts.k_d, counts.k_c, counts.k_cm, params);
      const auto fitness_of = [&](int s) {
        if (s == 0) {
          const double token = noisy ? sample_noise_token(spec, rng)
                                     : neutral_noise_token(spec);
          return defector_fitness(base, params, spec, token);
        }
        return s == 1 ? base.f_c : base.f_cm;
      };
      const double f_focal = fitness_of(focal);
      const double f_model = fitness_of(model);
      if (rng.uniform01() < fermi_probability(f_model, f_focal, params.gamma)) {
        adopted = model;
      }
    }
  }
  if (adopted != focal) {
    int* slots[3] = {&counts.k_d, &counts.k_c, &counts.k_cm};
    --*slots[focal];
    ++*slots[adopted];
  }
}

TransitionRates rates_from_tokens(double k_d, double k_c, double k_cm,
                                  const GameParams& params,
                                  const PerceptionSpec& spec,
                                  std::span<const double> tokens) {
  const double z = static_cast<double>(params.z_pop);
  const BasePayoffs base = base_payoffs(k_d, k_c, k_cm, params);
  const bool noisy = is_stochastic(spec);

  // Fermi factors for pairs involving a defector, averaged over the tokens
  // when the perception is noisy.
  double fermi_d_beats_c = 0.0;   // focal C adopting D
  double fermi_c_beats_d = 0.0;   // focal D adopting C
  double fermi_d_beats_cm = 0.0;  // focal CM adopting D
  double fermi_cm_beats_d = 0.0;  // focal D adopting CM
  if (noisy) {
    if (tokens.empty()) {
      throw std::invalid_argument(
          "rates_from_tokens: stochastic spec requires noise tokens");
    }
    for (const double token : tokens) {
      const double f_d = defector_fitness(base, params, spec, token);
      fermi_d_beats_c += fermi_probability(f_d, base.f_c, params.gamma);
      fermi_c_beats_d += fermi_probability(base.f_c, f_d, params.gamma);
      fermi_d_beats_cm += fermi_probability(f_d, base.f_cm, params.gamma);
      fermi_cm_beats_d += fermi_probability(base.f_cm, f_d, params.gamma);
    }
    const double inv = 1.0 / static_cast<double>(tokens.size());
    fermi_d_beats_c *= inv;
    fermi_c_beats_d *= inv;
    fermi_d_beats_cm *= inv;
    fermi_cm_beats_d *= inv;
  } else {
    const double f_d =
        defector_fitness(base, params, spec, neutral_noise_token(spec));
    fermi_d_beats_c = fermi_probability(f_d, base.f_c, params.gamma);
    fermi_c_beats_d = fermi_probability(base.f_c, f_d, params.gamma);
    fermi_d_beats_cm = fermi_probability(f_d, base.f_cm, params.gamma);
    fermi_cm_beats_d = fermi_probability(base.f_cm, f_d, params.gamma);
  }
  const double fermi_c_beats_cm =
      fermi_probability(base.f_c, base.f_cm, params.gamma);
  const double fermi_cm_beats_c =
      fermi_probability(base.f_cm, base.f_c, params.gamma);

  const double k[3] = {std::max(k_d, 0.0), std::max(k_c, 0.0),
                       std::max(k_cm, 0.0)};
  const double fermi_to[3][3] = {
      {0.0, fermi_c_beats_d, fermi_cm_beats_d},
      {fermi_d_beats_c, 0.0, fermi_cm_beats_c},
      {fermi_d_beats_cm, fermi_c_beats_cm, 0.0},
  };

  TransitionRates rates;
  for (int from = 0; from < 3; ++from) {
    if (k[from] <= 0.0) continue;
    for (int to = 0; to < 3; ++to) {
      if (to == from) continue;
      const double imitation =
          (1.0 - params.mu) * (k[to] / (z - 1.0)) * fermi_to[from][to];
      const double mutation = params.mu / (kStrategyCount - 1);
      rates.rate[from][to] = (k[from] / z) * (imitation + mutation);
    }
  }
  return rates;
}

}  // namespace detail

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::domain_error(message);
}

GameParams moran_params(const GameParams& params) {
  params.validate();
  // The payoff ratios run over the whole population in the finite-population
  // layer, so the group size is the population size.
  return params.with_group_size(params.z_pop);
}

int strategy_index(Strategy s) { return static_cast<int>(s); }

}  // namespace

CountState CountState::create(int d, int c, int cm, int z) {
  require(d >= 0 && c >= 0 && cm >= 0, "CountState: counts must be >= 0");
  require(d + c + cm == z, "CountState: counts must sum to the population size");
  return CountState{d, c, cm};
}

void MoranConfig::validate() const {
  require(mc_samples >= 1, "MoranConfig.mc_samples must be >= 1");
}

double fermi_probability(double f_model, double f_focal, double gamma) {
  const double x = gamma * (f_model - f_focal);
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double TransitionRates::outgoing(Strategy from) const {
  const int f = strategy_index(from);
  double sum = 0.0;
  for (int to = 0; to < 3; ++to) sum += rate[f][to];
  return sum;
}

double TransitionRates::net_flow(Strategy into) const {
  const int i = strategy_index(into);
  double in = 0.0;
  for (int from = 0; from < 3; ++from) in += rate[from][i];
  return in - outgoing(into);
}

FitnessVector fitness_vector(const CountState& counts, const GameParams& params,
                             const PerceptionSpec& spec, SeededRng& rng) {
  const GameParams zp = moran_params(params);
  validate(spec);
  require(counts.total() == zp.z_pop,
          "fitness_vector: counts must sum to z_pop");
  const auto base = detail::base_payoffs(counts.k_d, counts.k_c, counts.k_cm, zp);
  const double token = is_stochastic(spec)
                           ? detail::sample_noise_token(spec, rng)
                           : detail::neutral_noise_token(spec);
  FitnessVector f;
  f.f_d = detail::defector_fitness(base, zp, spec, token);
  f.f_c = base.f_c;
  f.f_cm = base.f_cm;
  return f;
}

TransitionRates transition_rates(const CountState& counts,
                                 const GameParams& params,
                                 const PerceptionSpec& spec,
                                 const MoranConfig& config, SeededRng& rng) {
  const GameParams zp = moran_params(params);
  validate(spec);
  config.validate();
  require(counts.total() == zp.z_pop,
          "transition_rates: counts must sum to z_pop");

  if (!is_stochastic(spec)) {
    return detail::rates_from_tokens(counts.k_d, counts.k_c, counts.k_cm, zp,
                                     spec, {});
  }

  // Noisy perception: each Monte-Carlo sample draws the two sides of a
  // defector comparison independently, matching one step of the sampled
  // chain. Pair order is fixed so a given seed always yields the same rates.
  const double z = static_cast<double>(zp.z_pop);
  const auto base = detail::base_payoffs(counts.k_d, counts.k_c, counts.k_cm, zp);
  double avg[3][3] = {};
  const double f_det[3] = {0.0, base.f_c, base.f_cm};
  for (int t = 0; t < config.mc_samples; ++t) {
    for (int from = 0; from < 3; ++from) {
      for (int to = 0; to < 3; ++to) {
        if (to == from) continue;
        double f_focal = f_det[from];
        double f_model = f_det[to];
        if (from == 0) {
          f_focal = detail::defector_fitness(
              base, zp, spec, detail::sample_noise_token(spec, rng));
        }
        if (to == 0) {
          f_model = detail::defector_fitness(
              base, zp, spec, detail::sample_noise_token(spec, rng));
        }
        avg[from][to] += fermi_probability(f_model, f_focal, zp.gamma);
      }
    }
  }

  const double k[3] = {static_cast<double>(counts.k_d),
                       static_cast<double>(counts.k_c),
                       static_cast<double>(counts.k_cm)};
  TransitionRates rates;
  for (int from = 0; from < 3; ++from) {
    if (k[from] <= 0.0) continue;
    for (int to = 0; to < 3; ++to) {
      if (to == from) continue;
      const double fermi = avg[from][to] / config.mc_samples;
      const double imitation = (1.0 - zp.mu) * (k[to] / (z - 1.0)) * fermi;
      const double mutation = zp.mu / (kStrategyCount - 1);
      rates.rate[from][to] = (k[from] / z) * (imitation + mutation);
    }
  }
  return rates;
}

std::array<double, 3> selection_gradient(const CountState& counts,
                                         const GameParams& params,
                                         const PerceptionSpec& spec,
                                         const MoranConfig& config) {
  SeededRng rng(config.seed);
  const TransitionRates rates =
      transition_rates(counts, params, spec, config, rng);
  return detail::net_flows(rates);
}

GradientField drift_field(const GameParams& params, const PerceptionSpec& spec,
                          const MoranConfig& config, int resolution) {
  const GameParams zp = moran_params(params);
  validate(spec);
  config.validate();
  if (resolution < 1) {
    throw std::domain_error("drift_field: resolution must be >= 1");
  }

  const int z = zp.z_pop;
  const double r = static_cast<double>(resolution);

  // Lattice points snap to the nearest integer composition (largest-remainder
  // rounding); the reported frequencies are those of the evaluated counts.
  std::vector<CountState> states;
  for (int i = 0; i <= resolution; ++i) {
    for (int j = 0; j <= resolution - i; ++j) {
      const double target[3] = {i / r * z, j / r * z,
                                (resolution - i - j) / r * z};
      int k[3];
      double frac[3];
      int assigned = 0;
      for (int t = 0; t < 3; ++t) {
        k[t] = static_cast<int>(std::floor(target[t]));
        frac[t] = target[t] - k[t];
        assigned += k[t];
      }
      for (int left = z - assigned; left > 0; --left) {
        int best = 0;
        for (int t = 1; t < 3; ++t) {
          if (frac[t] > frac[best]) best = t;
        }
        ++k[best];
        frac[best] = -1.0;
      }
      states.push_back(CountState{k[0], k[1], k[2]});
    }
  }

  GradientField field;
  field.resolution = resolution;
  field.points.resize(states.size());
  field.vectors.resize(states.size());
  SeededRng base(config.seed);
  parallel_for(states.size(), [&](std::size_t idx) {
    const CountState& st = states[idx];
    const double zd = static_cast<double>(z);
    field.points[idx] = FrequencyVector{st.k_d / zd, st.k_c / zd, st.k_cm / zd};
    SeededRng stream = base.derive(idx);
    const TransitionRates rates =
        transition_rates(st, params, spec, config, stream);
    field.vectors[idx] = detail::net_flows(rates);
  });
  return field;
}

std::vector<CountState> simulate(const CountState& start, const GameParams& params,
                                 const PerceptionSpec& spec,
                                 const MoranConfig& config, long n_steps,
                                 SeededRng& rng) {
  const GameParams zp = moran_params(params);
  validate(spec);
  config.validate();
  require(start.total() == zp.z_pop, "simulate: counts must sum to z_pop");
  if (n_steps < 0) throw std::domain_error("simulate: n_steps must be >= 0");

  const int z = zp.z_pop;
  const bool noisy = is_stochastic(spec);

  std::vector<CountState> path;
  path.reserve(static_cast<std::size_t>(n_steps) + 1);
  path.push_back(start);

  if (config.noise_binding == MoranConfig::NoiseBinding::PerAgentFixed) {
    // Agent-level walk: every agent keeps one noise draw for the whole run,
    // so a defector's misperception is a stable trait rather than a fresh
    // estimate per comparison.
    std::vector<Strategy> agents;
    agents.reserve(static_cast<std::size_t>(z));
    for (int i = 0; i < start.k_d; ++i) agents.push_back(Strategy::Defector);
    for (int i = 0; i < start.k_c; ++i) agents.push_back(Strategy::Contributor);
    for (int i = 0; i < start.k_cm; ++i)
      agents.push_back(Strategy::ContributorMonitor);
    std::vector<double> token(static_cast<std::size_t>(z),
                              detail::neutral_noise_token(spec));
    if (noisy) {
      for (auto& t : token) t = detail::sample_noise_token(spec, rng);
    }

    CountState counts = start;
    for (long stepno = 0; stepno < n_steps; ++stepno) {
      const auto focal = static_cast<std::size_t>(rng.below(agents.size()));
      const Strategy old_strategy = agents[focal];
      if (zp.mu > 0.0 && rng.uniform01() < zp.mu) {
        const int shift = 1 + static_cast<int>(rng.below(2));
        agents[focal] =
            static_cast<Strategy>((strategy_index(old_strategy) + shift) % 3);
      } else {
        auto model = static_cast<std::size_t>(rng.below(agents.size() - 1));
        if (model >= focal) ++model;
        const Strategy model_strategy = agents[model];
        if (model_strategy != old_strategy) {
          const auto base =
              detail::base_payoffs(counts.k_d, counts.k_c, counts.k_cm, zp);
          const auto fitness_of = [&](Strategy s, std::size_t agent) {
            switch (s) {
              case Strategy::Defector:
                return detail::defector_fitness(base, zp, spec, token[agent]);
              case Strategy::Contributor:
                return base.f_c;
              default:
                return base.f_cm;
            }
          };
          const double f_focal = fitness_of(old_strategy, focal);
          const double f_model = fitness_of(model_strategy, model);
          if (rng.uniform01() <
              fermi_probability(f_model, f_focal, zp.gamma)) {
            agents[focal] = model_strategy;
          }
        }
      }
      if (agents[focal] != old_strategy) {
        int* slots[3] = {&counts.k_d, &counts.k_c, &counts.k_cm};
        --*slots[strategy_index(old_strategy)];
        ++*slots[strategy_index(agents[focal])];
      }
      path.push_back(counts);
    }
    return path;
  }

  CountState counts = start;
  for (long stepno = 0; stepno < n_steps; ++stepno) {
    // A homogeneous composition without mutation can never move again; pad
    // the remaining steps without consuming draws.
    if (zp.mu == 0.0 &&
        (counts.k_d == z || counts.k_c == z || counts.k_cm == z)) {
      path.insert(path.end(), static_cast<std::size_t>(n_steps - stepno),
                  counts);
      break;
    }
    detail::advance_chain(counts, zp, spec, rng);
    path.push_back(counts);
  }
  return path;
}

int TransitionMatrix::index_of(const CountState& counts) const {
  const int z = z_pop;
  if (counts.k_d < 0 || counts.k_c < 0 || counts.k_cm < 0 ||
      counts.total() != z) {
    throw std::domain_error("TransitionMatrix: state outside the simplex");
  }
  const int d = counts.k_d;
  // Offset of the block with k_d = d, then position by k_c within the block.
  return d * (z + 1) - d * (d - 1) / 2 + counts.k_c;
}

TransitionMatrix transition_matrix(const GameParams& params,
                                   const PerceptionSpec& spec,
                                   const MoranConfig& config) {
  const GameParams zp = moran_params(params);
  validate(spec);
  config.validate();
  if (zp.z_pop > 100) {
    throw std::domain_error(
        "transition_matrix: z_pop > 100 would enumerate too many states; "
        "use simulate() instead");
  }

  TransitionMatrix matrix;
  matrix.z_pop = zp.z_pop;
  const int z = zp.z_pop;
  for (int d = 0; d <= z; ++d) {
    for (int c = 0; c <= z - d; ++c) {
      matrix.states.push_back(CountState{d, c, z - d - c});
    }
  }

  matrix.rows.resize(matrix.states.size());
  SeededRng base(config.seed);
  parallel_for(matrix.states.size(), [&](std::size_t idx) {
    const CountState& st = matrix.states[idx];
    SeededRng stream = base.derive(idx);
    const TransitionRates rates =
        transition_rates(st, params, spec, config, stream);
    auto& row = matrix.rows[idx];
    double outgoing = 0.0;
    for (int from = 0; from < 3; ++from) {
      for (int to = 0; to < 3; ++to) {
        if (to == from) continue;
        const double p = rates.rate[from][to];
        if (p <= 0.0) continue;
        int next[3] = {st.k_d, st.k_c, st.k_cm};
        --next[from];
        ++next[to];
        const int col =
            matrix.index_of(CountState{next[0], next[1], next[2]});
        row.emplace_back(col, p);
        outgoing += p;
      }
    }
    row.emplace_back(static_cast<int>(idx), std::max(1.0 - outgoing, 0.0));
  });
  return matrix;
}

StationaryResult stationary_distribution(const TransitionMatrix& matrix) {
  const std::size_t n = matrix.states.size();
  if (n == 0) throw std::domain_error("stationary_distribution: empty chain");

  constexpr double kResidualTol = 1e-12;
  constexpr long kMaxIterations = 1000000;

  StationaryResult result;
  result.pi.assign(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n, 0.0);

  for (long it = 1; it <= kMaxIterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t row = 0; row < n; ++row) {
      const double mass = result.pi[row];
      if (mass == 0.0) continue;
      for (const auto& [col, p] : matrix.rows[row]) {
        next[static_cast<std::size_t>(col)] += mass * p;
      }
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= total;
      residual = std::max(residual, std::abs(next[i] - result.pi[i]));
    }
    result.pi.swap(next);
    result.residual = residual;
    result.iterations = it;
    if (residual < kResidualTol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace instboot
