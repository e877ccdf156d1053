#include "instboot/replicator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "instboot/parallel.hpp"

namespace instboot {

namespace {

void require_deterministic(const PerceptionSpec& spec) {
  if (is_stochastic(spec)) {
    throw std::invalid_argument(
        "replicator dynamics require a deterministic perception spec; "
        "use the finite-population layer for noisy perception");
  }
}

// Utilities at a possibly slightly off-simplex point. Negative coordinates
// (which central differences and Newton steps produce near the boundary) are
// clamped inside the count aggregates so the payoff formulas stay defined;
// the growth law itself keeps the raw frequencies.
PayoffVector utilities_at(double x_d, double x_c, double x_cm,
                          const GameParams& params, const PerceptionSpec& spec) {
  const double n = static_cast<double>(params.n_group);
  PopulationState state;
  state.n_d = std::max(x_d, 0.0) * n;
  state.n_c_only = std::max(x_c, 0.0) * n;
  state.n_cm = std::max(x_cm, 0.0) * n;
  const double q = catch_probability(params, state);
  const double true_c_f = expected_freeride_cost(params, state);
  const double perceived = perceive_freeride_cost(true_c_f, q, params, spec);
  return payoff_vector(params, state, perceived);
}

std::array<double, 3> raw_derivative(double x_d, double x_c, double x_cm,
                                     const GameParams& params,
                                     const PerceptionSpec& spec) {
  const PayoffVector u = utilities_at(x_d, x_c, x_cm, params, spec);
  const double mean = x_d * u.u_d + x_c * u.u_c + x_cm * u.u_cm;
  // Adding 0.0 turns the -0.0 produced on simplex faces into +0.0.
  return {x_d * (u.u_d - mean) + 0.0, x_c * (u.u_c - mean) + 0.0,
          x_cm * (u.u_cm - mean) + 0.0};
}

struct Vec2 {
  double c = 0.0;
  double cm = 0.0;
};

Vec2 field2(const Vec2& y, const GameParams& params, const PerceptionSpec& spec) {
  const auto d = raw_derivative(1.0 - y.c - y.cm, y.c, y.cm, params, spec);
  return {d[1], d[2]};
}

double norm_inf(const Vec2& v) {
  return std::max(std::abs(v.c), std::abs(v.cm));
}

// 2x2 Jacobian of field2 by central differences.
std::array<double, 4> jacobian2(const Vec2& y, const GameParams& params,
                                const PerceptionSpec& spec, double h) {
  const Vec2 fc_p = field2({y.c + h, y.cm}, params, spec);
  const Vec2 fc_m = field2({y.c - h, y.cm}, params, spec);
  const Vec2 fm_p = field2({y.c, y.cm + h}, params, spec);
  const Vec2 fm_m = field2({y.c, y.cm - h}, params, spec);
  return {(fc_p.c - fc_m.c) / (2.0 * h), (fm_p.c - fm_m.c) / (2.0 * h),
          (fc_p.cm - fc_m.cm) / (2.0 * h), (fm_p.cm - fm_m.cm) / (2.0 * h)};
}

std::array<std::complex<double>, 2> eigenvalues2(const std::array<double, 4>& j) {
  const double tr = j[0] + j[3];
  const double det = j[0] * j[3] - j[1] * j[2];
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    return {std::complex<double>((tr + root) / 2.0, 0.0),
            std::complex<double>((tr - root) / 2.0, 0.0)};
  }
  const double imag = std::sqrt(-disc) / 2.0;
  return {std::complex<double>(tr / 2.0, imag),
          std::complex<double>(tr / 2.0, -imag)};
}

struct NewtonResult {
  Vec2 root;
  bool converged = false;
};

// Damped Newton iteration on the in-simplex coordinates. Steps are clamped
// into a box slightly larger than the simplex so boundary roots remain
// reachable without the iterate escaping to infinity.
NewtonResult refine_root(Vec2 y, const GameParams& params,
                         const PerceptionSpec& spec) {
  constexpr double kResidualTol = 1e-12;
  constexpr double kJacobianStep = 1e-7;
  constexpr int kMaxIterations = 120;

  Vec2 f = field2(y, params, spec);
  for (int it = 0; it < kMaxIterations; ++it) {
    if (norm_inf(f) < kResidualTol) return {y, true};

    const auto j = jacobian2(y, params, spec, kJacobianStep);
    const double det = j[0] * j[3] - j[1] * j[2];
    if (std::abs(det) < 1e-14) return {y, false};

    const Vec2 delta = {(-f.c * j[3] + f.cm * j[1]) / det,
                        (f.c * j[2] - f.cm * j[0]) / det};

    bool advanced = false;
    for (double t = 1.0; t >= 1.0 / 1024.0; t /= 2.0) {
      Vec2 trial = {std::clamp(y.c + t * delta.c, -0.25, 1.25),
                    std::clamp(y.cm + t * delta.cm, -0.25, 1.25)};
      const Vec2 f_trial = field2(trial, params, spec);
      if (norm_inf(f_trial) < norm_inf(f)) {
        y = trial;
        f = f_trial;
        advanced = true;
        break;
      }
    }
    if (!advanced) return {y, norm_inf(f) < kResidualTol};
  }
  return {y, norm_inf(f) < kResidualTol};
}

}  // namespace

const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Saddle: return "saddle";
    case Stability::Nonhyperbolic: return "nonhyperbolic";
  }
  return "unknown";
}

FrequencyVector FrequencyVector::create(double x_d, double x_c, double x_cm) {
  const double sum = x_d + x_c + x_cm;
  if (!(std::isfinite(sum) && std::abs(sum - 1.0) <= 1e-9)) {
    throw std::domain_error("FrequencyVector: components must sum to 1");
  }
  if (x_d < -1e-12 || x_c < -1e-12 || x_cm < -1e-12) {
    throw std::domain_error("FrequencyVector: components must be non-negative");
  }
  return FrequencyVector{std::max(x_d, 0.0), std::max(x_c, 0.0),
                         std::max(x_cm, 0.0)};
}

FrequencyVector FrequencyVector::normalized(double x_d, double x_c, double x_cm) {
  x_d = std::max(x_d, 0.0);
  x_c = std::max(x_c, 0.0);
  x_cm = std::max(x_cm, 0.0);
  const double sum = x_d + x_c + x_cm;
  if (!(std::isfinite(sum) && sum > 0.0)) {
    throw std::domain_error("FrequencyVector: cannot normalize a zero vector");
  }
  return FrequencyVector{x_d / sum, x_c / sum, x_cm / sum};
}

std::array<double, 3> replicator_derivative(const FrequencyVector& x,
                                            const GameParams& params,
                                            const PerceptionSpec& spec) {
  params.validate();
  require_deterministic(spec);
  return raw_derivative(x.x_d, x.x_c, x.x_cm, params, spec);
}

std::array<double, 3> replicator_drift_from_payoffs(const FrequencyVector& x,
                                                    const PayoffVector& u) {
  const double mean = x.x_d * u.u_d + x.x_c * u.u_c + x.x_cm * u.u_cm;
  return {x.x_d * (u.u_d - mean) + 0.0, x.x_c * (u.u_c - mean) + 0.0,
          x.x_cm * (u.u_cm - mean) + 0.0};
}

std::vector<FrequencyVector> integrate_trajectory(const FrequencyVector& x0,
                                                  const GameParams& params,
                                                  const PerceptionSpec& spec,
                                                  double step, long n_steps) {
  params.validate();
  require_deterministic(spec);
  if (!(std::isfinite(step) && step > 0.0)) {
    throw std::domain_error("integrate_trajectory: step must be > 0");
  }
  if (n_steps < 0) {
    throw std::domain_error("integrate_trajectory: n_steps must be >= 0");
  }

  std::vector<FrequencyVector> path;
  path.reserve(static_cast<std::size_t>(n_steps) + 1);
  path.push_back(x0);

  FrequencyVector x = x0;
  const auto f = [&](double a, double b, double c) {
    return raw_derivative(a, b, c, params, spec);
  };
  for (long i = 0; i < n_steps; ++i) {
    const auto k1 = f(x.x_d, x.x_c, x.x_cm);
    const auto k2 = f(x.x_d + 0.5 * step * k1[0], x.x_c + 0.5 * step * k1[1],
                      x.x_cm + 0.5 * step * k1[2]);
    const auto k3 = f(x.x_d + 0.5 * step * k2[0], x.x_c + 0.5 * step * k2[1],
                      x.x_cm + 0.5 * step * k2[2]);
    const auto k4 = f(x.x_d + step * k3[0], x.x_c + step * k3[1],
                      x.x_cm + step * k3[2]);
    const double x_d =
        x.x_d + step / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    const double x_c =
        x.x_c + step / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    const double x_cm =
        x.x_cm + step / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
    if (!std::isfinite(x_d) || !std::isfinite(x_c) || !std::isfinite(x_cm)) {
      throw std::runtime_error("integrate_trajectory: state became non-finite");
    }
    x = FrequencyVector::normalized(x_d, x_c, x_cm);
    path.push_back(x);
  }
  return path;
}

GradientField gradient_field(const GameParams& params, const PerceptionSpec& spec,
                             int resolution) {
  params.validate();
  require_deterministic(spec);
  if (resolution < 1) {
    throw std::domain_error("gradient_field: resolution must be >= 1");
  }

  GradientField field;
  field.resolution = resolution;
  const double r = static_cast<double>(resolution);
  for (int i = 0; i <= resolution; ++i) {
    for (int j = 0; j <= resolution - i; ++j) {
      const int k = resolution - i - j;
      field.points.push_back(
          FrequencyVector{i / r, j / r, k / r});
    }
  }
  field.vectors.resize(field.points.size());
  parallel_for(field.points.size(), [&](std::size_t idx) {
    const FrequencyVector& x = field.points[idx];
    field.vectors[idx] = raw_derivative(x.x_d, x.x_c, x.x_cm, params, spec);
  });
  return field;
}

std::array<std::complex<double>, 2> tangent_jacobian_eigenvalues(
    const FrequencyVector& x, const GameParams& params,
    const PerceptionSpec& spec) {
  params.validate();
  require_deterministic(spec);
  const auto j = jacobian2({x.x_c, x.x_cm}, params, spec, 1e-6);
  return eigenvalues2(j);
}

Stability classify_fixed_point(const FrequencyVector& x, const GameParams& params,
                               const PerceptionSpec& spec, double tol) {
  const auto eig = tangent_jacobian_eigenvalues(x, params, spec);
  const double re0 = eig[0].real();
  const double re1 = eig[1].real();
  if (std::abs(re0) <= tol || std::abs(re1) <= tol) {
    return Stability::Nonhyperbolic;
  }
  if (re0 < 0.0 && re1 < 0.0) return Stability::Stable;
  if (re0 > 0.0 && re1 > 0.0) return Stability::Unstable;
  return Stability::Saddle;
}

FixedPointSearch find_fixed_points(const GameParams& params,
                                   const PerceptionSpec& spec,
                                   int seed_resolution, double tol) {
  params.validate();
  require_deterministic(spec);
  if (seed_resolution < 1) {
    throw std::domain_error("find_fixed_points: seed_resolution must be >= 1");
  }

  std::vector<Vec2> seeds;
  const double r = static_cast<double>(seed_resolution);
  for (int i = 0; i <= seed_resolution; ++i) {
    for (int j = 0; j <= seed_resolution - i; ++j) {
      seeds.push_back({j / r, (seed_resolution - i - j) / r});
    }
  }

  std::vector<NewtonResult> results(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t idx) {
    results[idx] = refine_root(seeds[idx], params, spec);
  });

  // The vertices satisfy the growth law exactly; listing them first lets the
  // exact forms win deduplication against nearby numerical roots.
  std::vector<FrequencyVector> roots = {FrequencyVector{1.0, 0.0, 0.0},
                                        FrequencyVector{0.0, 1.0, 0.0},
                                        FrequencyVector{0.0, 0.0, 1.0}};
  FixedPointSearch search;
  for (std::size_t idx = 0; idx < seeds.size(); ++idx) {
    const auto& res = results[idx];
    const double x_d = 1.0 - res.root.c - res.root.cm;
    if (!res.converged) {
      search.non_converged.push_back(FrequencyVector{
          1.0 - seeds[idx].c - seeds[idx].cm, seeds[idx].c, seeds[idx].cm});
      continue;
    }
    // Discard refinements that escaped the simplex; roots grazing the
    // boundary are projected back onto it.
    if (x_d < -1e-7 || res.root.c < -1e-7 || res.root.cm < -1e-7) continue;
    FrequencyVector loc =
        FrequencyVector::normalized(x_d, res.root.c, res.root.cm);
    const auto residual = raw_derivative(loc.x_d, loc.x_c, loc.x_cm, params, spec);
    const double res_norm = std::max(
        {std::abs(residual[0]), std::abs(residual[1]), std::abs(residual[2])});
    if (res_norm > 1e-10) continue;
    roots.push_back(loc);
  }

  std::vector<FrequencyVector> unique;
  for (const auto& root : roots) {
    const bool duplicate =
        std::any_of(unique.begin(), unique.end(), [&](const FrequencyVector& u) {
          return std::abs(u.x_d - root.x_d) < 1e-6 &&
                 std::abs(u.x_c - root.x_c) < 1e-6 &&
                 std::abs(u.x_cm - root.x_cm) < 1e-6;
        });
    if (!duplicate) unique.push_back(root);
  }

  std::sort(unique.begin(), unique.end(),
            [](const FrequencyVector& a, const FrequencyVector& b) {
              if (a.x_d != b.x_d) return a.x_d < b.x_d;
              if (a.x_c != b.x_c) return a.x_c < b.x_c;
              return a.x_cm < b.x_cm;
            });

  for (const auto& loc : unique) {
    FixedPoint fp;
    fp.location = loc;
    fp.eigenvalues = tangent_jacobian_eigenvalues(loc, params, spec);
    const double re0 = fp.eigenvalues[0].real();
    const double re1 = fp.eigenvalues[1].real();
    if (std::abs(re0) <= tol || std::abs(re1) <= tol) {
      fp.stability = Stability::Nonhyperbolic;
    } else if (re0 < 0.0 && re1 < 0.0) {
      fp.stability = Stability::Stable;
    } else if (re0 > 0.0 && re1 > 0.0) {
      fp.stability = Stability::Unstable;
    } else {
      fp.stability = Stability::Saddle;
    }
    search.points.push_back(fp);
  }
  return search;
}

}  // namespace instboot
