#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "instboot/moran.hpp"
#include "instboot/rng.hpp"

using namespace instboot;

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

double log_factorial(int n) {
  double sum = 0.0;
  for (int i = 2; i <= n; ++i) sum += std::log(static_cast<double>(i));
  return sum;
}

double multinomial_third(int z, const CountState& st) {
  const double log_p =
      log_factorial(z) - log_factorial(st.k_d) - log_factorial(st.k_c) -
      log_factorial(st.k_cm) - z * std::log(3.0);
  return std::exp(log_p);
}

}  // namespace

TEST_CASE("count state validation") {
  const CountState st = CountState::create(10, 20, 10, 40);
  CHECK(st.k_d == 10);
  CHECK(st.total() == 40);
  CHECK_THROWS_AS(CountState::create(10, 20, 11, 40), std::domain_error);
  CHECK_THROWS_AS(CountState::create(-1, 21, 20, 40), std::domain_error);
}

TEST_CASE("moran config validation") {
  MoranConfig config;
  config.validate();
  config.mc_samples = 0;
  CHECK_THROWS_AS(config.validate(), std::domain_error);
}

TEST_CASE("imitation probability") {
  CHECK(fermi_probability(1.0, 1.0, 2.0) == 0.5);
  CHECK(fermi_probability(3.0, -1.0, 0.0) == 0.5);
  CHECK(near(fermi_probability(1.0, 0.0, 1.0), 0.7310585786300049, 1e-15));

  // Complementary comparisons sum to one.
  SeededRng rng(600);
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform(-20.0, 20.0);
    const double b = rng.uniform(-20.0, 20.0);
    const double g = rng.uniform(0.0, 10.0);
    const double p = fermi_probability(a, b, g);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(near(p + fermi_probability(b, a, g), 1.0, 1e-15));
  }

  // Extreme arguments saturate instead of overflowing.
  CHECK(fermi_probability(1e8, 0.0, 10.0) == 1.0);
  CHECK(fermi_probability(0.0, 1e8, 10.0) == 0.0);
}

TEST_CASE("fitness values use the whole population as the group") {
  const GameParams p = GameParams::favourable();
  SeededRng rng(601);

  const FitnessVector corner =
      fitness_vector(CountState::create(40, 0, 0, 40), p, Identity{}, rng);
  CHECK(near(corner.f_d, 0.0, 1e-12));
  CHECK(near(corner.f_c, -1.0, 1e-12));
  CHECK(near(corner.f_cm, -1.5, 1e-12));

  const FitnessVector mixed =
      fitness_vector(CountState::create(0, 20, 20, 40), p, Identity{}, rng);
  CHECK(near(mixed.f_d, -1.7, 1e-12));
  CHECK(near(mixed.f_c, -0.2, 1e-12));
  CHECK(near(mixed.f_cm, -0.3, 1e-12));

  CHECK_THROWS_AS(
      fitness_vector(CountState{10, 10, 10}, p, Identity{}, rng),
      std::domain_error);
}

TEST_CASE("switch rates at reference compositions") {
  GameParams p = GameParams::favourable();
  MoranConfig config;
  SeededRng rng(602);

  // Without mutation a homogeneous composition is frozen.
  p.mu = 0.0;
  const TransitionRates frozen =
      transition_rates(CountState::create(40, 0, 0, 40), p, Identity{}, config,
                       rng);
  for (int from = 0; from < 3; ++from) {
    for (int to = 0; to < 3; ++to) CHECK(frozen.rate[from][to] == 0.0);
  }

  // Neutral selection: every imitation fires with probability 1/2.
  p.gamma = 0.0;
  const TransitionRates neutral =
      transition_rates(CountState::create(20, 10, 10, 40), p, Identity{},
                       config, rng);
  CHECK(near(neutral.rate[0][1], 0.0641025641025641, 1e-15));  // 5/78
  CHECK(near(neutral.rate[0][2], 0.0641025641025641, 1e-15));
  // Same product k_from * k_to, same neutral Fermi factor.
  CHECK(near(neutral.rate[1][0], 0.0641025641025641, 1e-15));

  // Full mutation: imitation disappears and each strategy mutates at k/(2Z).
  p = GameParams::favourable();
  p.mu = 1.0;
  const TransitionRates mutful =
      transition_rates(CountState::create(20, 10, 10, 40), p, Identity{},
                       config, rng);
  CHECK(near(mutful.rate[0][1], 0.25, 1e-15));
  CHECK(near(mutful.rate[0][2], 0.25, 1e-15));
  CHECK(near(mutful.rate[1][0], 0.125, 1e-15));
  CHECK(near(mutful.rate[2][0], 0.125, 1e-15));
}

TEST_CASE("switch rates match a direct evaluation") {
  const GameParams p = GameParams::favourable();
  MoranConfig config;
  SeededRng rng(603);
  const CountState st = CountState::create(4, 12, 24, 40);
  const TransitionRates rates =
      transition_rates(st, p, Identity{}, config, rng);

  SeededRng probe(604);
  const FitnessVector f =
      fitness_vector(st, p, Identity{}, probe);
  const double fit[3] = {f.f_d, f.f_c, f.f_cm};
  const double k[3] = {4.0, 12.0, 24.0};
  const double z = 40.0;
  for (int from = 0; from < 3; ++from) {
    for (int to = 0; to < 3; ++to) {
      if (from == to) {
        CHECK(rates.rate[from][to] == 0.0);
        continue;
      }
      const double expected =
          (k[from] / z) *
          ((1.0 - p.mu) * (k[to] / (z - 1.0)) *
               fermi_probability(fit[to], fit[from], p.gamma) +
           p.mu / 2.0);
      CHECK(near(rates.rate[from][to], expected, 1e-15));
    }
  }

  // Total switching probability never exceeds one.
  double total = 0.0;
  for (int from = 0; from < 3; ++from) total += rates.outgoing(
      static_cast<Strategy>(from));
  CHECK(total <= 1.0 + 1e-12);

  // Monitors outcompete defectors when monitoring is dense.
  CHECK(rates.net_flow(Strategy::Defector) < 0.0);
}

TEST_CASE("net flows sum to zero") {
  const GameParams p = GameParams::unfavourable();
  MoranConfig config;
  config.seed = 11;
  SeededRng rng(605);
  for (const auto& st : {CountState::create(13, 13, 14, 40),
                         CountState::create(39, 1, 0, 40),
                         CountState::create(0, 1, 39, 40)}) {
    const auto flows = selection_gradient(st, p, Identity{}, config);
    CHECK(near(flows[0] + flows[1] + flows[2], 0.0, 1e-14));
  }
  GameParams frozen = p;
  frozen.mu = 0.0;
  const auto still =
      selection_gradient(CountState::create(0, 40, 0, 40), frozen, Identity{},
                         config);
  CHECK(still[0] == 0.0);
  CHECK(still[1] == 0.0);
  CHECK(still[2] == 0.0);
}

TEST_CASE("degenerate noise reproduces the exact rates") {
  const GameParams p = GameParams::favourable();
  const CountState st = CountState::create(20, 10, 10, 40);
  MoranConfig config;

  SeededRng rng_a(606);
  const TransitionRates exact =
      transition_rates(st, p, Identity{}, config, rng_a);

  // A vanishing noise width perturbs every Fermi factor by at most
  // gamma * width / 4 per draw.
  config.mc_samples = 64;
  SeededRng rng_b(607);
  const TransitionRates tiny =
      transition_rates(st, p, AbsoluteNoise{1e-12}, config, rng_b);
  for (int from = 0; from < 3; ++from) {
    for (int to = 0; to < 3; ++to) {
      CHECK(near(tiny.rate[from][to], exact.rate[from][to], 1e-9));
    }
  }

  // Degenerate proportional noise is detected as deterministic and consumes
  // no draws at all.
  SeededRng rng_c(608);
  const TransitionRates degenerate =
      transition_rates(st, p, ProportionalNoise{1.0, 1.0}, config, rng_c);
  for (int from = 0; from < 3; ++from) {
    for (int to = 0; to < 3; ++to) {
      CHECK(degenerate.rate[from][to] == exact.rate[from][to]);
    }
  }
}

TEST_CASE("noisy rates are reproducible per seed") {
  const GameParams p = GameParams::favourable();
  const CountState st = CountState::create(25, 5, 10, 40);
  MoranConfig config;
  config.mc_samples = 200;

  SeededRng a(42);
  SeededRng b(42);
  const TransitionRates ra =
      transition_rates(st, p, ProportionalNoise{0.25, 4.0}, config, a);
  const TransitionRates rb =
      transition_rates(st, p, ProportionalNoise{0.25, 4.0}, config, b);
  for (int from = 0; from < 3; ++from) {
    for (int to = 0; to < 3; ++to) {
      CHECK(ra.rate[from][to] == rb.rate[from][to]);
    }
  }
}

TEST_CASE("drift field reports lattice compositions") {
  GameParams p = GameParams::favourable();
  p.mu = 0.0;
  MoranConfig config;
  config.seed = 9;

  const GradientField field = drift_field(p, Identity{}, config, 40);
  CHECK(field.points.size() == 861);
  for (const auto& x : field.points) {
    const double kd = x.x_d * 40.0;
    CHECK(near(kd, std::round(kd), 1e-9));
  }

  const GradientField again = drift_field(p, Identity{}, config, 40);
  for (std::size_t i = 0; i < field.vectors.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(field.vectors[i][k] == again.vectors[i][k]);
    }
  }
}

TEST_CASE("sampled runs") {
  const GameParams p = GameParams::favourable();
  MoranConfig config;
  const CountState start = CountState::create(14, 13, 13, 40);

  SeededRng a(1001);
  const auto path_a = simulate(start, p, Identity{}, config, 500, a);
  CHECK(path_a.size() == 501);
  CHECK(path_a.front().k_d == 14);
  for (std::size_t i = 0; i < path_a.size(); ++i) {
    CHECK(path_a[i].total() == 40);
    if (i > 0) {
      const int moved = std::abs(path_a[i].k_d - path_a[i - 1].k_d) +
                        std::abs(path_a[i].k_c - path_a[i - 1].k_c) +
                        std::abs(path_a[i].k_cm - path_a[i - 1].k_cm);
      CHECK((moved == 0 || moved == 2));
    }
  }

  SeededRng b(1001);
  const auto path_b = simulate(start, p, Identity{}, config, 500, b);
  for (std::size_t i = 0; i < path_a.size(); ++i) {
    CHECK(path_a[i].k_d == path_b[i].k_d);
    CHECK(path_a[i].k_c == path_b[i].k_c);
    CHECK(path_a[i].k_cm == path_b[i].k_cm);
  }

  SeededRng c(1002);
  const auto path_c = simulate(start, p, Identity{}, config, 500, c);
  bool any_diff = false;
  for (std::size_t i = 0; i < path_a.size(); ++i) {
    if (path_a[i].k_d != path_c[i].k_d || path_a[i].k_c != path_c[i].k_c) {
      any_diff = true;
      break;
    }
  }
  CHECK(any_diff);
}

TEST_CASE("homogeneous states absorb without mutation") {
  GameParams p = GameParams::favourable();
  p.mu = 0.0;
  MoranConfig config;
  for (const auto& start : {CountState::create(40, 0, 0, 40),
                            CountState::create(0, 40, 0, 40),
                            CountState::create(0, 0, 40, 40)}) {
    SeededRng rng(77);
    const auto path = simulate(start, p, Identity{}, config, 1000, rng);
    CHECK(path.size() == 1001);
    for (const auto& st : path) {
      CHECK(st.k_d == start.k_d);
      CHECK(st.k_c == start.k_c);
      CHECK(st.k_cm == start.k_cm);
    }
  }
}

TEST_CASE("per-agent noise binding") {
  const GameParams p = GameParams::favourable();
  MoranConfig config;
  config.noise_binding = MoranConfig::NoiseBinding::PerAgentFixed;
  const CountState start = CountState::create(14, 13, 13, 40);

  SeededRng a(2001);
  const auto path_a =
      simulate(start, p, ProportionalNoise{0.25, 4.0}, config, 400, a);
  CHECK(path_a.size() == 401);
  for (const auto& st : path_a) CHECK(st.total() == 40);

  SeededRng b(2001);
  const auto path_b =
      simulate(start, p, ProportionalNoise{0.25, 4.0}, config, 400, b);
  for (std::size_t i = 0; i < path_a.size(); ++i) {
    CHECK(path_a[i].k_d == path_b[i].k_d);
    CHECK(path_a[i].k_cm == path_b[i].k_cm);
  }
}

TEST_CASE("transition matrix structure") {
  GameParams p = GameParams::favourable();
  p.z_pop = 6;
  MoranConfig config;

  const TransitionMatrix m = transition_matrix(p, Identity{}, config);
  CHECK(m.z_pop == 6);
  CHECK(m.states.size() == 28);
  for (std::size_t i = 0; i < m.states.size(); ++i) {
    CHECK(m.index_of(m.states[i]) == static_cast<int>(i));
    double sum = 0.0;
    for (const auto& [col, prob] : m.rows[i]) {
      CHECK(prob >= 0.0);
      CHECK(col >= 0);
      CHECK(col < 28);
      sum += prob;
    }
    CHECK(near(sum, 1.0, 1e-12));
  }
  CHECK_THROWS_AS(m.index_of(CountState{3, 3, 3}), std::domain_error);

  GameParams big = GameParams::favourable();
  big.z_pop = 101;
  CHECK_THROWS_AS(transition_matrix(big, Identity{}, config),
                  std::domain_error);

  // Rows remain stochastic under Monte-Carlo averaged noisy rates.
  MoranConfig noisy;
  noisy.mc_samples = 32;
  noisy.seed = 5;
  const TransitionMatrix mn =
      transition_matrix(p, ProportionalNoise{0.5, 2.0}, noisy);
  for (const auto& row : mn.rows) {
    double sum = 0.0;
    for (const auto& [col, prob] : row) sum += prob;
    CHECK(near(sum, 1.0, 1e-12));
  }

  // Without mutation the corners are absorbing rows.
  GameParams frozen = p;
  frozen.mu = 0.0;
  const TransitionMatrix mf = transition_matrix(frozen, Identity{}, config);
  for (const auto& corner : {CountState{6, 0, 0}, CountState{0, 6, 0},
                             CountState{0, 0, 6}}) {
    const auto& row = mf.rows[static_cast<std::size_t>(mf.index_of(corner))];
    REQUIRE(row.size() == 1);
    CHECK(row.front().first == mf.index_of(corner));
    CHECK(row.front().second == 1.0);
  }
}

TEST_CASE("pure mutation equilibrates to the uniform strategy mix") {
  GameParams p = GameParams::favourable();
  p.z_pop = 6;
  p.mu = 1.0;
  MoranConfig config;

  const TransitionMatrix m = transition_matrix(p, Identity{}, config);
  const StationaryResult result = stationary_distribution(m);
  CHECK(result.converged);
  CHECK(result.residual < 1e-12);

  double total = 0.0;
  for (std::size_t i = 0; i < m.states.size(); ++i) {
    CHECK(result.pi[i] >= 0.0);
    total += result.pi[i];
    // Each agent resamples uniformly over the other two strategies, so the
    // stationary composition is multinomial with weight 1/3 each.
    CHECK(near(result.pi[i], multinomial_third(6, m.states[i]), 1e-10));
  }
  CHECK(near(total, 1.0, 1e-12));
}

TEST_CASE("stationary distribution with weak mutation") {
  GameParams p = GameParams::favourable();
  p.z_pop = 12;
  p.mu = 0.05;
  MoranConfig config;

  const TransitionMatrix m = transition_matrix(p, Identity{}, config);
  const StationaryResult result = stationary_distribution(m);
  CHECK(result.converged);
  double total = 0.0;
  for (const double v : result.pi) {
    CHECK(v >= 0.0);
    total += v;
  }
  CHECK(near(total, 1.0, 1e-12));
}
