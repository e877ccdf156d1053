#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "instboot/replicator.hpp"
#include "instboot/rng.hpp"

using namespace instboot;

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

FrequencyVector random_point(SeededRng& rng) {
  const double a = rng.uniform01();
  const double b = rng.uniform01();
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  return FrequencyVector{lo, hi - lo, 1.0 - hi};
}

const FixedPoint* find_near(const FixedPointSearch& search, double x_d,
                            double x_c, double x_cm, double tol) {
  for (const auto& fp : search.points) {
    if (near(fp.location.x_d, x_d, tol) && near(fp.location.x_c, x_c, tol) &&
        near(fp.location.x_cm, x_cm, tol)) {
      return &fp;
    }
  }
  return nullptr;
}

}  // namespace

TEST_CASE("frequency vector constructors") {
  const FrequencyVector x = FrequencyVector::create(0.2, 0.3, 0.5);
  CHECK(x.x_d == 0.2);
  CHECK(x.x_c == 0.3);
  CHECK(x.x_cm == 0.5);
  CHECK_THROWS_AS(FrequencyVector::create(0.5, 0.5, 0.5), std::domain_error);
  CHECK_THROWS_AS(FrequencyVector::create(-0.2, 0.7, 0.5), std::domain_error);

  const FrequencyVector n = FrequencyVector::normalized(2.0, 1.0, 1.0);
  CHECK(near(n.x_d, 0.5, 1e-15));
  CHECK(near(n.x_c, 0.25, 1e-15));
  CHECK_THROWS_AS(FrequencyVector::normalized(0.0, 0.0, 0.0),
                  std::domain_error);
}

TEST_CASE("vertices are rest points") {
  for (const GameParams& p :
       {GameParams::favourable(), GameParams::unfavourable()}) {
    for (const auto& v : {FrequencyVector{1.0, 0.0, 0.0},
                          FrequencyVector{0.0, 1.0, 0.0},
                          FrequencyVector{0.0, 0.0, 1.0}}) {
      const auto d = replicator_derivative(v, p, Identity{});
      CHECK(d[0] == 0.0);
      CHECK(d[1] == 0.0);
      CHECK(d[2] == 0.0);
    }
  }
}

TEST_CASE("derivative at the barycenter") {
  const auto d = replicator_derivative(
      FrequencyVector::create(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
      GameParams::favourable(), Identity{});
  CHECK(near(d[0], -0.13703703703703704, 1e-12));  // -37/270
  CHECK(near(d[0] + d[1] + d[2], 0.0, 1e-15));
}

TEST_CASE("growth law invariants") {
  SeededRng rng(512);
  const std::vector<PerceptionSpec> specs = {Identity{}, CoarseBias{1.5},
                                             Prelec{1.0, 0.8}};
  for (const GameParams& p :
       {GameParams::favourable(), GameParams::unfavourable()}) {
    for (const auto& spec : specs) {
      for (int i = 0; i < 2000; ++i) {
        const FrequencyVector x = random_point(rng);
        const auto d = replicator_derivative(x, p, spec);
        // The flow stays on the simplex.
        CHECK(near(d[0] + d[1] + d[2], 0.0, 1e-12));
        // Faces are invariant: an absent strategy cannot grow.
        if (x.x_d == 0.0) CHECK(d[0] == 0.0);
        if (x.x_c == 0.0) CHECK(d[1] == 0.0);
        if (x.x_cm == 0.0) CHECK(d[2] == 0.0);
      }
      // Explicit boundary points.
      const auto edge = replicator_derivative(
          FrequencyVector::create(0.7, 0.0, 0.3), p, spec);
      CHECK(edge[1] == 0.0);
    }
  }
}

TEST_CASE("drift depends only on payoff differences") {
  SeededRng rng(513);
  for (int i = 0; i < 500; ++i) {
    const FrequencyVector x = random_point(rng);
    PayoffVector u;
    u.u_d = rng.uniform(-3.0, 3.0);
    u.u_c = rng.uniform(-3.0, 3.0);
    u.u_cm = rng.uniform(-3.0, 3.0);
    PayoffVector shifted = u;
    const double c = 3.7;
    shifted.u_d += c;
    shifted.u_c += c;
    shifted.u_cm += c;
    const auto a = replicator_drift_from_payoffs(x, u);
    const auto b = replicator_drift_from_payoffs(x, shifted);
    for (int k = 0; k < 3; ++k) CHECK(near(a[k], b[k], 1e-12));
  }
}

TEST_CASE("stochastic specs are rejected") {
  const FrequencyVector x = FrequencyVector::create(0.4, 0.3, 0.3);
  CHECK_THROWS_AS(
      replicator_derivative(x, GameParams::favourable(), AbsoluteNoise{2.0}),
      std::invalid_argument);
  CHECK_THROWS_AS(gradient_field(GameParams::favourable(),
                                 ProportionalNoise{0.5, 2.0}, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(find_fixed_points(GameParams::favourable(),
                                    AbsoluteNoise{1.0}),
                  std::invalid_argument);
}

TEST_CASE("gradient field layout") {
  const GradientField f =
      gradient_field(GameParams::favourable(), Identity{}, 2);
  CHECK(f.resolution == 2);
  CHECK(f.points.size() == 6);
  CHECK(f.vectors.size() == 6);
  CHECK(f.points.front().x_d == 0.0);
  CHECK(f.points.front().x_cm == 1.0);
  CHECK(f.points.back().x_d == 1.0);

  const GradientField big =
      gradient_field(GameParams::favourable(), Identity{}, 50);
  CHECK(big.points.size() == 1326);

  CHECK_THROWS_AS(gradient_field(GameParams::favourable(), Identity{}, 0),
                  std::domain_error);
}

TEST_CASE("unit coarse bias matches the identity field") {
  const GradientField a =
      gradient_field(GameParams::favourable(), Identity{}, 15);
  const GradientField b =
      gradient_field(GameParams::favourable(), CoarseBias{1.0}, 15);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    for (int k = 0; k < 3; ++k) CHECK(a.vectors[i][k] == b.vectors[i][k]);
  }
}

TEST_CASE("trajectories") {
  const GameParams p = GameParams::favourable();

  const auto constant = integrate_trajectory(FrequencyVector{1.0, 0.0, 0.0}, p,
                                             Identity{}, 0.02, 100);
  CHECK(constant.size() == 101);
  for (const auto& x : constant) CHECK(x.x_d == 1.0);

  // Defector-heavy starts collapse to full defection.
  const auto to_d = integrate_trajectory(
      FrequencyVector::create(0.9, 0.05, 0.05), p, Identity{}, 0.02, 20000);
  CHECK(to_d.back().x_d > 1.0 - 1e-6);

  // Monitor-heavy starts reach the defector-free mixture with 40% monitors.
  const auto to_coop = integrate_trajectory(
      FrequencyVector::create(0.05, 0.05, 0.9), p, Identity{}, 0.02, 20000);
  CHECK(to_coop.back().x_d < 1e-8);
  CHECK(near(to_coop.back().x_cm, 0.4, 1e-4));

  // Halving the step moves the endpoint by no more than the integrator error.
  const FrequencyVector start = FrequencyVector::create(0.3, 0.3, 0.4);
  const auto coarse = integrate_trajectory(start, p, Identity{}, 0.02, 2500);
  const auto fine = integrate_trajectory(start, p, Identity{}, 0.01, 5000);
  CHECK(near(coarse.back().x_d, fine.back().x_d, 1e-8));
  CHECK(near(coarse.back().x_cm, fine.back().x_cm, 1e-8));

  CHECK_THROWS_AS(integrate_trajectory(start, p, Identity{}, 0.0, 10),
                  std::domain_error);
  CHECK_THROWS_AS(integrate_trajectory(start, p, Identity{}, 0.02, -1),
                  std::domain_error);
}

TEST_CASE("rest points in the favourable regime") {
  const GameParams p = GameParams::favourable();
  const FixedPointSearch search = find_fixed_points(p, Identity{});

  const FixedPoint* d_vertex = find_near(search, 1.0, 0.0, 0.0, 1e-9);
  REQUIRE(d_vertex != nullptr);
  CHECK(d_vertex->stability == Stability::Stable);
  CHECK(d_vertex->eigenvalues[0].real() < 0.0);
  CHECK(d_vertex->eigenvalues[1].real() < 0.0);

  const FixedPoint* c_vertex = find_near(search, 0.0, 1.0, 0.0, 1e-9);
  REQUIRE(c_vertex != nullptr);
  CHECK(c_vertex->stability == Stability::Unstable);

  // Defector-free mixture where the diverted share covers the checking cost.
  const FixedPoint* coop = find_near(search, 0.0, 0.6, 0.4, 1e-6);
  REQUIRE(coop != nullptr);
  CHECK(coop->stability == Stability::Stable);

  // Monitor-edge composition where defection stops paying.
  const FixedPoint* edge = find_near(search, 0.74, 0.0, 0.26, 1e-6);
  REQUIRE(edge != nullptr);
  CHECK(edge->stability == Stability::Unstable);

  // Exactly two attractors.
  int stable = 0;
  for (const auto& fp : search.points) {
    if (fp.stability == Stability::Stable) ++stable;
  }
  CHECK(stable == 2);

  // Every reported point is an actual rest point.
  for (const auto& fp : search.points) {
    const auto d = replicator_derivative(fp.location, p, Identity{});
    CHECK(near(std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])}), 0.0,
               1e-10));
  }
}

TEST_CASE("rest points in the unfavourable regime") {
  const GameParams p = GameParams::unfavourable();
  const FixedPointSearch search = find_fixed_points(p, Identity{});

  int stable = 0;
  const FixedPoint* stable_point = nullptr;
  for (const auto& fp : search.points) {
    if (fp.stability == Stability::Stable) {
      ++stable;
      stable_point = &fp;
    }
  }
  REQUIRE(stable == 1);
  CHECK(near(stable_point->location.x_d, 1.0, 1e-9));

  // The defector-free edge still has a rest point where the diverted share
  // covers the checking cost, but it no longer attracts.
  const FixedPoint* edge = find_near(search, 0.0, 0.92, 0.08, 1e-6);
  REQUIRE(edge != nullptr);
  CHECK(edge->stability != Stability::Stable);
}

TEST_CASE("classification matches the eigenvalue signs") {
  const GameParams p = GameParams::favourable();
  const FrequencyVector d_vertex{1.0, 0.0, 0.0};
  CHECK(classify_fixed_point(d_vertex, p, Identity{}, 1e-8) ==
        Stability::Stable);
  const auto eig = tangent_jacobian_eigenvalues(d_vertex, p, Identity{});
  CHECK(eig[0].real() < 0.0);
  CHECK(eig[1].real() < 0.0);
}
