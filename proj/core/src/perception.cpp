#include "instboot/perception.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace instboot {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::domain_error(message);
}

}  // namespace

void validate(const PerceptionSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Identity>) {
          // nothing to check
        } else if constexpr (std::is_same_v<T, CoarseBias>) {
          require(std::isfinite(s.factor) && s.factor > 0.0,
                  "CoarseBias.factor must be > 0");
        } else if constexpr (std::is_same_v<T, Prelec>) {
          require(std::isfinite(s.zeta) && s.zeta > 0.0,
                  "Prelec.zeta must be > 0");
          require(std::isfinite(s.lambda) && s.lambda > 0.0,
                  "Prelec.lambda must be > 0");
        } else if constexpr (std::is_same_v<T, ProportionalNoise>) {
          require(std::isfinite(s.lo) && s.lo > 0.0,
                  "ProportionalNoise.lo must be > 0");
          require(std::isfinite(s.hi), "ProportionalNoise.hi must be finite");
          require(s.lo <= 1.0 && 1.0 <= s.hi,
                  "ProportionalNoise requires lo <= 1 <= hi");
        } else if constexpr (std::is_same_v<T, AbsoluteNoise>) {
          require(std::isfinite(s.width) && s.width >= 0.0,
                  "AbsoluteNoise.width must be >= 0");
        }
      },
      spec);
}

bool is_stochastic(const PerceptionSpec& spec) {
  if (const auto* prop = std::get_if<ProportionalNoise>(&spec)) {
    return prop->lo != 1.0 || prop->hi != 1.0;
  }
  if (const auto* abs = std::get_if<AbsoluteNoise>(&spec)) {
    return abs->width != 0.0;
  }
  return false;
}

double prelec_weight(double q, double zeta, double lambda) {
  require(std::isfinite(q) && q >= 0.0 && q <= 1.0,
          "prelec_weight: q must lie in [0, 1]");
  require(std::isfinite(zeta) && zeta > 0.0, "prelec_weight: zeta must be > 0");
  require(std::isfinite(lambda) && lambda > 0.0,
          "prelec_weight: lambda must be > 0");
  if (q == 0.0) return 0.0;
  return std::exp(-zeta * std::pow(-std::log(q), lambda));
}

double sample_proportional_multiplier(const ProportionalNoise& noise,
                                      SeededRng& rng) {
  if (noise.scheme == NoiseScheme::LogUniform) {
    return std::exp(rng.uniform(std::log(noise.lo), std::log(noise.hi)));
  }
  // Fair coin for the side first, then the magnitude, so under- and
  // over-estimation stay equally likely regardless of the interval widths.
  const bool below = rng.uniform01() < 0.5;
  return below ? rng.uniform(noise.lo, 1.0) : rng.uniform(1.0, noise.hi);
}

double sample_absolute_offset(double width, SeededRng& rng) {
  return rng.uniform(-width, width);
}

double perceive_freeride_cost(double true_c_f, double catch_prob,
                              const GameParams& params,
                              const PerceptionSpec& spec, SeededRng& rng) {
  validate(spec);
  require(std::isfinite(true_c_f) && true_c_f >= 0.0,
          "perceive_freeride_cost: true_c_f must be >= 0");
  require(std::isfinite(catch_prob) && catch_prob >= 0.0 && catch_prob <= 1.0,
          "perceive_freeride_cost: catch_prob must lie in [0, 1]");

  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Identity>) {
          return true_c_f;
        } else if constexpr (std::is_same_v<T, CoarseBias>) {
          return s.factor * true_c_f;
        } else if constexpr (std::is_same_v<T, Prelec>) {
          if (s.target == PrelecTarget::PerCheckProb) {
            return params.p_checks * prelec_weight(catch_prob, s.zeta, s.lambda) *
                   params.s;
          }
          const double total =
              std::clamp(params.p_checks * catch_prob, 0.0, 1.0);
          return prelec_weight(total, s.zeta, s.lambda) * params.s;
        } else if constexpr (std::is_same_v<T, ProportionalNoise>) {
          return sample_proportional_multiplier(s, rng) * true_c_f;
        } else {
          static_assert(std::is_same_v<T, AbsoluteNoise>);
          const double perceived = true_c_f + sample_absolute_offset(s.width, rng);
          return s.clamp_at_zero ? std::max(perceived, 0.0) : perceived;
        }
      },
      spec);
}

double perceive_freeride_cost(double true_c_f, double catch_prob,
                              const GameParams& params,
                              const PerceptionSpec& spec) {
  if (is_stochastic(spec)) {
    throw std::invalid_argument(
        "perceive_freeride_cost: stochastic spec requires an rng");
  }
  SeededRng unused(0);
  return perceive_freeride_cost(true_c_f, catch_prob, params, spec, unused);
}

}  // namespace instboot
