#include "instboot/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "instboot/parallel.hpp"
#include "moran_internal.hpp"

namespace instboot {

namespace {

struct LabeledAttractor {
  FrequencyVector location;
  BasinLabel label = BasinLabel::Unresolved;
};

BasinLabel label_for_point(double x_d) {
  if (x_d > 0.99) return BasinLabel::Defection;
  if (x_d < 0.01) return BasinLabel::Cooperative;
  return BasinLabel::Unresolved;
}

double distance(const FrequencyVector& a, const FrequencyVector& b) {
  const double dd = a.x_d - b.x_d;
  const double dc = a.x_c - b.x_c;
  const double dm = a.x_cm - b.x_cm;
  return std::sqrt(dd * dd + dc * dc + dm * dm);
}

std::vector<FrequencyVector> lattice_cells(int resolution) {
  std::vector<FrequencyVector> cells;
  const double r = static_cast<double>(resolution);
  for (int i = 0; i <= resolution; ++i) {
    for (int j = 0; j <= resolution - i; ++j) {
      cells.push_back(FrequencyVector{i / r, j / r, (resolution - i - j) / r});
    }
  }
  return cells;
}

std::vector<LabeledAttractor> stable_attractors(const GameParams& params,
                                                const PerceptionSpec& spec) {
  std::vector<LabeledAttractor> attractors;
  for (const auto& fp : find_fixed_points(params, spec).points) {
    if (fp.stability != Stability::Stable) continue;
    attractors.push_back({fp.location, label_for_point(fp.location.x_d)});
  }
  return attractors;
}

BasinLabel trace_replicator_cell(const FrequencyVector& start,
                                 const GameParams& params,
                                 const PerceptionSpec& spec,
                                 const std::vector<LabeledAttractor>& targets,
                                 const BasinOptions& options) {
  FrequencyVector x = start;
  const double h = options.step;
  for (long stepno = 0; stepno <= options.max_steps; ++stepno) {
    for (const auto& target : targets) {
      if (distance(x, target.location) <= options.attractor_tol) {
        return target.label;
      }
    }
    const auto d = replicator_derivative(x, params, spec);
    const double speed =
        std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
    // Rest points that are not stable attractors (vertices, saddles, neutral
    // boundary points) trap the orbit without resolving it.
    if (speed < 1e-13) return BasinLabel::Unresolved;
    if (stepno == options.max_steps) break;

    const auto f = [&](double a, double b, double c) {
      return replicator_derivative(FrequencyVector{a, b, c}, params, spec);
    };
    const auto k1 = d;
    const auto k2 = f(x.x_d + 0.5 * h * k1[0], x.x_c + 0.5 * h * k1[1],
                      x.x_cm + 0.5 * h * k1[2]);
    const auto k3 = f(x.x_d + 0.5 * h * k2[0], x.x_c + 0.5 * h * k2[1],
                      x.x_cm + 0.5 * h * k2[2]);
    const auto k4 =
        f(x.x_d + h * k3[0], x.x_c + h * k3[1], x.x_cm + h * k3[2]);
    x = FrequencyVector::normalized(
        x.x_d + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x.x_c + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        x.x_cm + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]));
  }
  return BasinLabel::Unresolved;
}

struct ExpectedMotion {
  const GameParams& zp;
  const PerceptionSpec& spec;
  std::span<const double> tokens;

  std::array<double, 3> drift(const std::array<double, 3>& k) const {
    return detail::net_flows(
        detail::rates_from_tokens(k[0], k[1], k[2], zp, spec, tokens));
  }
};

std::array<double, 3> advance_expected(const std::array<double, 3>& k,
                                       const ExpectedMotion& motion, double z) {
  auto d = motion.drift(k);
  std::array<double, 3> next = {k[0] + d[0], k[1] + d[1], k[2] + d[2]};
  double sum = 0.0;
  for (auto& v : next) {
    v = std::max(v, 0.0);
    sum += v;
  }
  for (auto& v : next) v *= z / sum;
  return next;
}

BasinLabel trace_expected_motion_cell(
    const FrequencyVector& start, const GameParams& zp,
    const PerceptionSpec& spec, std::span<const double> tokens,
    const std::vector<LabeledAttractor>& targets, bool have_targets,
    const BasinOptions& options) {
  const double z = static_cast<double>(zp.z_pop);
  const ExpectedMotion motion{zp, spec, tokens};

  std::array<double, 3> k = {start.x_d * z, start.x_c * z, start.x_cm * z};
  const auto freq = [&](const std::array<double, 3>& v) {
    return FrequencyVector{v[0] / z, v[1] / z, v[2] / z};
  };

  for (long stepno = 0; stepno <= options.max_steps; ++stepno) {
    if (have_targets) {
      for (const auto& target : targets) {
        if (distance(freq(k), target.location) <= options.attractor_tol) {
          return target.label;
        }
      }
    }
    const auto d = motion.drift(k);
    const double speed =
        std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
    if (speed < 1e-12 || stepno == options.max_steps) {
      if (have_targets) return BasinLabel::Unresolved;
      if (speed >= 1e-12) return BasinLabel::Unresolved;  // budget, still moving

      // No classified rest points exist for noisy drift, so label the stall
      // by its defector share -- but accept a defector-free stall only if the
      // flow pulls back after a kick toward the defector corner (otherwise a
      // saddle on the defector-free edge would masquerade as an attractor).
      const double x_d = k[0] / z;
      if (x_d > 0.99) return BasinLabel::Defection;
      if (x_d >= 0.01) return BasinLabel::Unresolved;

      const double kick = 0.02 * z;
      const double rest = k[1] + k[2];
      if (rest <= 0.0) return BasinLabel::Unresolved;
      std::array<double, 3> probe = {k[0] + kick,
                                     k[1] - kick * (k[1] / rest),
                                     k[2] - kick * (k[2] / rest)};
      for (auto& v : probe) v = std::max(v, 0.0);
      for (long p = 0; p < 5000; ++p) {
        probe = advance_expected(probe, motion, z);
        if (distance(freq(probe), freq(k)) <= 5e-3) {
          return BasinLabel::Cooperative;
        }
      }
      return BasinLabel::Unresolved;
    }
    k = advance_expected(k, motion, z);
  }
  return BasinLabel::Unresolved;
}

// Monitor-edge composition for a monitor fraction m: no plain contributors,
// defectors fill the rest.
std::array<double, 3> edge_counts(double m, double z) {
  return {(1.0 - m) * z, 0.0, m * z};
}

}  // namespace

const char* to_string(BasinLabel label) {
  switch (label) {
    case BasinLabel::Defection: return "defection";
    case BasinLabel::Cooperative: return "cooperative";
    case BasinLabel::Unresolved: return "unresolved";
  }
  return "unknown";
}

const char* to_string(BasinDynamics dynamics) {
  switch (dynamics) {
    case BasinDynamics::Replicator: return "replicator";
    case BasinDynamics::MoranExpectedMotion: return "moran_expected_motion";
  }
  return "unknown";
}

BasinReport basin_map(const GameParams& params, const PerceptionSpec& spec,
                      int resolution, BasinDynamics dynamics,
                      const BasinOptions& options) {
  params.validate();
  validate(spec);
  if (resolution < 1) {
    throw std::domain_error("basin_map: resolution must be >= 1");
  }
  if (options.max_steps < 1) {
    throw std::domain_error("basin_map: max_steps must be >= 1");
  }
  if (options.mc_samples < 1) {
    throw std::domain_error("basin_map: mc_samples must be >= 1");
  }
  const bool noisy = is_stochastic(spec);
  if (dynamics == BasinDynamics::Replicator && noisy) {
    throw std::invalid_argument(
        "basin_map: replicator dynamics require a deterministic spec; use "
        "MoranExpectedMotion for noisy perception");
  }

  BasinReport report;
  report.dynamics = dynamics;
  report.resolution = resolution;
  report.seed = options.seed;
  report.mc_samples = noisy ? options.mc_samples : 0;
  report.cells = lattice_cells(resolution);
  report.labels.assign(report.cells.size(), BasinLabel::Unresolved);

  if (dynamics == BasinDynamics::Replicator) {
    const auto targets = stable_attractors(params, spec);
    parallel_for(report.cells.size(), [&](std::size_t idx) {
      report.labels[idx] = trace_replicator_cell(report.cells[idx], params,
                                                 spec, targets, options);
    });
  } else {
    const GameParams zp = params.with_group_size(params.z_pop);
    // Deterministic specs share the continuous dynamics' rest points, so the
    // same classified targets (and the same stopping rule) apply; noisy
    // drift has no classified rest points and falls back to stall labeling.
    const bool have_targets = !noisy;
    const auto targets = have_targets ? stable_attractors(params, spec)
                                      : std::vector<LabeledAttractor>{};
    SeededRng base(options.seed);
    parallel_for(report.cells.size(), [&](std::size_t idx) {
      std::vector<double> tokens;
      if (noisy) {
        SeededRng stream = base.derive(idx);
        tokens.reserve(static_cast<std::size_t>(options.mc_samples));
        for (int t = 0; t < options.mc_samples; ++t) {
          tokens.push_back(detail::sample_noise_token(spec, stream));
        }
      }
      report.labels[idx] = trace_expected_motion_cell(
          report.cells[idx], zp, spec, tokens, targets, have_targets, options);
    });
  }

  std::size_t counts[3] = {0, 0, 0};
  for (const auto label : report.labels) ++counts[static_cast<int>(label)];
  const double total = static_cast<double>(report.cells.size());
  report.fraction_defection = counts[0] / total;
  report.fraction_cooperative = counts[1] / total;
  report.fraction_unresolved = counts[2] / total;
  return report;
}

ThresholdReport edge_threshold(const GameParams& params,
                               const PerceptionSpec& spec,
                               const ThresholdOptions& options) {
  params.validate();
  validate(spec);
  if (options.mc_samples < 1) {
    throw std::domain_error("edge_threshold: mc_samples must be >= 1");
  }
  if (!(options.tol > 0.0)) {
    throw std::domain_error("edge_threshold: tol must be > 0");
  }

  ThresholdReport report;
  report.spec = spec;

  constexpr double kLo = 1e-9;
  constexpr double kHi = 1.0 - 1e-9;

  if (!is_stochastic(spec)) {
    // Defection advantage over monitoring on the edge. Strictly decreasing in
    // the monitor fraction (every deterministic distortion is increasing in
    // it), so the sign changes at most once.
    const auto advantage = [&](double m) {
      const double n = static_cast<double>(params.n_group);
      PopulationState state;
      state.n_d = (1.0 - m) * n;
      state.n_c_only = 0.0;
      state.n_cm = m * n;
      const double q = catch_probability(params, state);
      const double true_c_f = expected_freeride_cost(params, state);
      const double perceived =
          perceive_freeride_cost(true_c_f, q, params, spec);
      const PayoffVector u = payoff_vector(params, state, perceived);
      return u.u_d - u.u_cm;
    };
    report.method = "bisection-exact";
    double lo = kLo;
    double hi = kHi;
    const double f_lo = advantage(lo);
    const double f_hi = advantage(hi);
    if ((f_lo > 0.0) == (f_hi > 0.0)) {
      return report;  // no sign change inside the edge
    }
    while (hi - lo > options.tol) {
      const double mid = 0.5 * (lo + hi);
      if ((advantage(mid) > 0.0) == (f_lo > 0.0)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    report.m_star = 0.5 * (lo + hi);
    return report;
  }

  // Noisy perception: bisect the sign of the expected drift's defector
  // component on the edge. One draw set is frozen up front and reused at
  // every bisection point, so the estimate is a deterministic, monotone
  // function of the monitor fraction.
  const GameParams zp = params.with_group_size(params.z_pop);
  SeededRng rng(options.seed);
  std::vector<double> tokens;
  tokens.reserve(static_cast<std::size_t>(options.mc_samples));
  for (int t = 0; t < options.mc_samples; ++t) {
    tokens.push_back(detail::sample_noise_token(spec, rng));
  }
  const double z = static_cast<double>(zp.z_pop);
  const auto defector_drift = [&](double m) {
    const auto k = edge_counts(m, z);
    const auto rates = detail::rates_from_tokens(k[0], k[1], k[2], zp, spec,
                                                 tokens);
    return rates.net_flow(Strategy::Defector);
  };
  report.method = "bisection-monte-carlo";
  double lo = kLo;
  double hi = kHi;
  const double f_lo = defector_drift(lo);
  const double f_hi = defector_drift(hi);
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    return report;
  }
  while (hi - lo > options.tol) {
    const double mid = 0.5 * (lo + hi);
    if ((defector_drift(mid) > 0.0) == (f_lo > 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  report.m_star = 0.5 * (lo + hi);
  return report;
}

std::vector<ThresholdReport> threshold_sweep(
    const GameParams& params, const std::vector<PerceptionSpec>& specs,
    const ThresholdOptions& options) {
  std::vector<ThresholdReport> reports(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      reports[i] = edge_threshold(params, specs[i], options);
    } catch (const std::exception& e) {
      reports[i].spec = specs[i];
      reports[i].error = e.what();
    }
  }
  return reports;
}

StartRegion defection_corner_region(double min_fraction_d) {
  return [min_fraction_d](const CountState& counts) {
    const double z = static_cast<double>(counts.total());
    return counts.k_d / z > min_fraction_d;
  };
}

double basin_escape_rate(const GameParams& params, const PerceptionSpec& spec,
                         const MoranConfig& config,
                         const StartRegion& start_region, long horizon,
                         int n_runs) {
  const GameParams zp = params.with_group_size(params.z_pop);
  zp.validate();
  validate(spec);
  config.validate();
  if (horizon < 1) throw std::domain_error("basin_escape_rate: horizon must be >= 1");
  if (n_runs < 1) throw std::domain_error("basin_escape_rate: n_runs must be >= 1");

  const int z = zp.z_pop;
  std::vector<CountState> starts;
  for (int d = 0; d <= z; ++d) {
    for (int c = 0; c <= z - d; ++c) {
      const CountState state{d, c, z - d - c};
      if (start_region(state)) starts.push_back(state);
    }
  }
  if (starts.empty()) {
    throw std::domain_error("basin_escape_rate: start region is empty");
  }

  const double escape_level = 0.1 * z;
  std::vector<char> escaped(static_cast<std::size_t>(n_runs), 0);
  parallel_for(static_cast<std::size_t>(n_runs), [&](std::size_t run) {
    SeededRng rng(mix_seed(config.seed, run));
    CountState counts = starts[rng.below(starts.size())];
    for (long stepno = 0; stepno < horizon; ++stepno) {
      if (counts.k_d < escape_level) {
        escaped[run] = 1;
        return;
      }
      // Absorbed in the all-defector corner: no escape is possible.
      if (zp.mu == 0.0 && counts.k_d == z) return;
      detail::advance_chain(counts, zp, spec, rng);
    }
    if (counts.k_d < escape_level) escaped[run] = 1;
  });

  std::size_t successes = 0;
  for (const char e : escaped) successes += e;
  return static_cast<double>(successes) / static_cast<double>(n_runs);
}

}  // namespace instboot
