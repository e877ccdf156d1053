#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "instboot/attractor.hpp"

using namespace instboot;

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

GameParams frozen_params(double gamma) {
  GameParams p = GameParams::favourable();
  p.gamma = gamma;
  p.mu = 0.0;
  return p;
}

}  // namespace

TEST_CASE("label names") {
  CHECK(std::string(to_string(BasinLabel::Defection)) == "defection");
  CHECK(std::string(to_string(BasinLabel::Cooperative)) == "cooperative");
  CHECK(std::string(to_string(BasinLabel::Unresolved)) == "unresolved");
  CHECK(std::string(to_string(BasinDynamics::Replicator)) == "replicator");
  CHECK(std::string(to_string(BasinDynamics::MoranExpectedMotion)) ==
        "moran_expected_motion");
}

TEST_CASE("exact edge thresholds") {
  const GameParams fav = GameParams::favourable();

  const ThresholdReport identity = edge_threshold(fav, Identity{});
  REQUIRE(identity.m_star.has_value());
  CHECK(identity.method == "bisection-exact");
  CHECK(near(*identity.m_star, 0.26, 2e-9));

  // A constant bias factor rescales the threshold inversely.
  for (const double factor : {0.75, 1.5, 3.7}) {
    const ThresholdReport biased = edge_threshold(fav, CoarseBias{factor});
    REQUIRE(biased.m_star.has_value());
    CHECK(near(*biased.m_star, 0.26 / factor, 2e-9));
  }

  const ThresholdReport unfav =
      edge_threshold(GameParams::unfavourable(), Identity{});
  REQUIRE(unfav.m_star.has_value());
  CHECK(near(*unfav.m_star, 0.66, 2e-9));

  // Overweighting rare inspections lowers the threshold, underweighting
  // raises it.
  const ThresholdReport low = edge_threshold(fav, Prelec{1.0, 0.8});
  REQUIRE(low.m_star.has_value());
  CHECK(near(*low.m_star, 0.23427965187251085, 1e-8));
  const ThresholdReport high = edge_threshold(fav, Prelec{1.0, 1.2});
  REQUIRE(high.m_star.has_value());
  CHECK(near(*high.m_star, 0.2775324917400057, 1e-8));
}

TEST_CASE("threshold absent when defection always pays") {
  const ThresholdReport report =
      edge_threshold(GameParams::favourable(), CoarseBias{0.2});
  CHECK(report.method == "bisection-exact");
  CHECK_FALSE(report.m_star.has_value());
  CHECK_FALSE(report.error.has_value());
}

TEST_CASE("noisy edge thresholds") {
  GameParams p = GameParams::favourable();
  p.mu = 0.0;
  ThresholdOptions options;
  options.seed = 7;

  const ThresholdReport a =
      edge_threshold(p, ProportionalNoise{0.25, 4.0}, options);
  REQUIRE(a.m_star.has_value());
  CHECK(a.method == "bisection-monte-carlo");
  CHECK(*a.m_star > 0.0);
  CHECK(*a.m_star < 0.26);

  const ThresholdReport b =
      edge_threshold(p, ProportionalNoise{0.25, 4.0}, options);
  REQUIRE(b.m_star.has_value());
  CHECK(*a.m_star == *b.m_star);

  // Degenerate noise takes the exact branch and lands on the identity value.
  const ThresholdReport degenerate =
      edge_threshold(p, ProportionalNoise{1.0, 1.0}, options);
  REQUIRE(degenerate.m_star.has_value());
  CHECK(degenerate.method == "bisection-exact");
  const ThresholdReport identity = edge_threshold(p, Identity{}, options);
  CHECK(*degenerate.m_star == *identity.m_star);
}

TEST_CASE("threshold sweep keeps going past failures") {
  const GameParams p = GameParams::favourable();
  const std::vector<PerceptionSpec> specs = {
      CoarseBias{0.75}, Identity{}, CoarseBias{1.5}, CoarseBias{-1.0}};
  const auto reports = threshold_sweep(p, specs);
  REQUIRE(reports.size() == 4);
  REQUIRE(reports[0].m_star.has_value());
  REQUIRE(reports[1].m_star.has_value());
  REQUIRE(reports[2].m_star.has_value());
  CHECK(*reports[0].m_star > *reports[1].m_star);
  CHECK(*reports[1].m_star > *reports[2].m_star);
  CHECK(reports[3].error.has_value());
  CHECK_FALSE(reports[3].m_star.has_value());
}

TEST_CASE("replicator basins in the favourable regime") {
  const BasinReport report = basin_map(GameParams::favourable(), Identity{},
                                       25, BasinDynamics::Replicator);
  CHECK(report.resolution == 25);
  CHECK(report.cells.size() == 351);
  CHECK(report.labels.size() == 351);
  CHECK(near(report.fraction_defection + report.fraction_cooperative +
                 report.fraction_unresolved,
             1.0, 1e-12));
  CHECK(report.fraction_cooperative > 0.6);
  CHECK(report.fraction_cooperative < 0.85);
  CHECK(report.fraction_defection > 0.1);
}

TEST_CASE("replicator basins in the unfavourable regime") {
  const BasinReport report = basin_map(GameParams::unfavourable(), Identity{},
                                       25, BasinDynamics::Replicator);
  CHECK(report.fraction_cooperative == 0.0);
  CHECK(report.fraction_defection > 0.9);
}

TEST_CASE("basin fractions are stable under refinement") {
  const BasinReport coarse = basin_map(GameParams::favourable(), Identity{},
                                       30, BasinDynamics::Replicator);
  const BasinReport fine = basin_map(GameParams::favourable(), Identity{},
                                     60, BasinDynamics::Replicator);
  CHECK(near(coarse.fraction_cooperative, fine.fraction_cooperative,
             2.0 / 30.0));
}

TEST_CASE("replicator basins reject noisy specs") {
  CHECK_THROWS_AS(basin_map(GameParams::favourable(), AbsoluteNoise{2.0}, 10,
                            BasinDynamics::Replicator),
                  std::invalid_argument);
}

TEST_CASE("expected-motion basins agree with the continuous flow") {
  const GameParams p = frozen_params(10.0);
  const BasinReport continuous =
      basin_map(p, Identity{}, 20, BasinDynamics::Replicator);
  const BasinReport expected =
      basin_map(p, Identity{}, 20, BasinDynamics::MoranExpectedMotion);
  REQUIRE(continuous.labels.size() == expected.labels.size());
  std::size_t agree = 0;
  for (std::size_t i = 0; i < continuous.labels.size(); ++i) {
    if (continuous.labels[i] == expected.labels[i]) ++agree;
  }
  CHECK(static_cast<double>(agree) / continuous.labels.size() >= 0.95);
}

TEST_CASE("expected-motion basins with noisy perception") {
  const GameParams p = frozen_params(10.0);
  BasinOptions options;
  options.mc_samples = 200;
  options.seed = 3;
  const BasinReport report =
      basin_map(p, ProportionalNoise{0.25, 4.0}, 8,
                BasinDynamics::MoranExpectedMotion, options);
  CHECK(report.cells.size() == 45);
  CHECK(report.mc_samples == 200);
  CHECK(report.seed == 3);
  CHECK(near(report.fraction_defection + report.fraction_cooperative +
                 report.fraction_unresolved,
             1.0, 1e-12));
  CHECK(report.fraction_cooperative > 0.0);

  const BasinReport again =
      basin_map(p, ProportionalNoise{0.25, 4.0}, 8,
                BasinDynamics::MoranExpectedMotion, options);
  for (std::size_t i = 0; i < report.labels.size(); ++i) {
    CHECK(report.labels[i] == again.labels[i]);
  }
}

TEST_CASE("start region enumeration") {
  const StartRegion region = defection_corner_region(0.9);
  CHECK(region(CountState{40, 0, 0}));
  CHECK(region(CountState{37, 2, 1}));
  CHECK_FALSE(region(CountState{36, 2, 2}));
  CHECK_FALSE(region(CountState{20, 10, 10}));
}

TEST_CASE("escape from the defection corner requires noise") {
  const GameParams p = frozen_params(10.0);
  MoranConfig config;
  config.seed = 31;

  const double quiet = basin_escape_rate(p, Identity{}, config,
                                         defection_corner_region(0.9), 20000,
                                         200);
  CHECK(quiet == 0.0);

  const double noisy = basin_escape_rate(p, AbsoluteNoise{16.0}, config,
                                         defection_corner_region(0.9), 100000,
                                         300);
  CHECK(noisy > 0.0);
  CHECK(noisy <= 1.0);

  const double again = basin_escape_rate(p, AbsoluteNoise{16.0}, config,
                                         defection_corner_region(0.9), 100000,
                                         300);
  CHECK(noisy == again);
}

TEST_CASE("escape rate input validation") {
  const GameParams p = frozen_params(10.0);
  MoranConfig config;
  CHECK_THROWS_AS(basin_escape_rate(p, Identity{}, config,
                                    defection_corner_region(0.9), 0, 10),
                  std::domain_error);
  CHECK_THROWS_AS(basin_escape_rate(p, Identity{}, config,
                                    defection_corner_region(0.9), 100, 0),
                  std::domain_error);
  CHECK_THROWS_AS(
      basin_escape_rate(p, Identity{}, config,
                        [](const CountState&) { return false; }, 100, 10),
      std::domain_error);
}
