// Command-line front end for the institution-bootstrapping toolkit: drift
// fields, rest-point catalogs, basins of attraction, edge thresholds,
// sampled runs, stationary distributions, and ternary-plot rendering.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "instboot/attractor.hpp"
#include "instboot/game.hpp"
#include "instboot/moran.hpp"
#include "instboot/perception.hpp"
#include "instboot/replicator.hpp"
#include "instboot/rng.hpp"
#include "instboot/serialize.hpp"
#include "instboot/simplex_svg.hpp"

namespace {

using namespace instboot;

struct CommonOpts {
  std::string preset = "favourable";
  std::string params_file;
  std::optional<double> alpha, beta, delta, p_checks, s, gamma, mu;
  std::optional<int> n_group, z_pop;
  std::string perception = "identity";
  std::uint64_t seed = 12345;
  std::string out;
};

void add_common_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--preset", o.preset, "Parameter preset")
      ->check(CLI::IsMember({"favourable", "unfavourable"}))
      ->capture_default_str();
  cmd->add_option("--params", o.params_file,
                  "JSON file with parameter overrides");
  cmd->add_option("--alpha", o.alpha, "Contribution cost");
  cmd->add_option("--beta", o.beta, "Pool fraction diverted to monitors");
  cmd->add_option("--delta", o.delta, "Cost per check");
  cmd->add_option("--p-checks", o.p_checks, "Checks per monitor");
  cmd->add_option("--s", o.s, "Sanction size");
  cmd->add_option("--n-group", o.n_group, "Group size in the payoff ratios");
  cmd->add_option("--z-pop", o.z_pop, "Finite population size");
  cmd->add_option("--gamma", o.gamma, "Selection intensity");
  cmd->add_option("--mu", o.mu, "Mutation probability");
  cmd->add_option("--perception", o.perception,
                  "Perception spec (shorthand like coarse:1.5 or JSON)")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", o.out, "Output path (default: stdout)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

GameParams make_params(const CommonOpts& o) {
  GameParams p = o.preset == "unfavourable" ? GameParams::unfavourable()
                                            : GameParams::favourable();
  if (!o.params_file.empty()) apply_params_json(p, read_file(o.params_file));
  if (o.alpha) p.alpha = *o.alpha;
  if (o.beta) p.beta = *o.beta;
  if (o.delta) p.delta = *o.delta;
  if (o.p_checks) p.p_checks = *o.p_checks;
  if (o.s) p.s = *o.s;
  if (o.n_group) p.n_group = *o.n_group;
  if (o.z_pop) p.z_pop = *o.z_pop;
  if (o.gamma) p.gamma = *o.gamma;
  if (o.mu) p.mu = *o.mu;
  p.validate();
  return p;
}

PerceptionSpec make_spec(const CommonOpts& o) {
  const PerceptionSpec spec = spec_from_string(o.perception);
  validate(spec);
  return spec;
}

CountState parse_start(const std::string& text, int z) {
  const auto fail = [&] {
    throw std::domain_error("start state must be \"k_d,k_c,k_cm\" summing to " +
                            std::to_string(z) + ", got \"" + text + "\"");
  };
  int k[3] = {0, 0, 0};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    std::size_t used = 0;
    try {
      k[i] = std::stoi(text.substr(pos), &used);
    } catch (const std::exception&) {
      fail();
    }
    pos += used;
    if (i < 2) {
      if (pos >= text.size() || text[pos] != ',') fail();
      ++pos;
    }
  }
  if (pos != text.size()) fail();
  return CountState::create(k[0], k[1], k[2], z);
}

CountState balanced_start(int z) {
  const int base = z / 3;
  int k[3] = {base, base, base};
  for (int i = 0; i < z - 3 * base; ++i) ++k[i];
  return CountState{k[0], k[1], k[2]};
}

int run_app(int argc, char** argv) {
  CLI::App app{"Institution bootstrapping: evolutionary dynamics of "
               "contribution and monitoring under distorted risk perception"};
  app.require_subcommand(1);

  // --- field -------------------------------------------------------------
  auto* field_cmd = app.add_subcommand(
      "field", "Drift vectors on a simplex lattice (CSV or JSON)");
  CommonOpts field_opts;
  add_common_options(field_cmd, field_opts);
  std::string field_dynamics = "replicator";
  std::optional<int> field_resolution;
  int field_mc = 1000;
  std::string field_format = "csv";
  field_cmd->add_option("--dynamics", field_dynamics, "Dynamics layer")
      ->check(CLI::IsMember({"replicator", "moran"}))
      ->capture_default_str();
  field_cmd->add_option("--resolution", field_resolution,
                        "Lattice subdivisions (default: 50, or z_pop for moran)");
  field_cmd->add_option("--mc-samples", field_mc,
                        "Monte-Carlo draws per rate for noisy specs")
      ->capture_default_str();
  field_cmd->add_option("--format", field_format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  field_cmd->callback([&] {
    const GameParams params = make_params(field_opts);
    const PerceptionSpec spec = make_spec(field_opts);
    GradientField field;
    std::optional<FieldSampling> sampling;
    if (field_dynamics == "replicator") {
      field = gradient_field(params, spec,
                             field_resolution.value_or(50));
    } else {
      MoranConfig config;
      config.mc_samples = field_mc;
      config.seed = field_opts.seed;
      field = drift_field(params, spec, config,
                          field_resolution.value_or(params.z_pop));
      if (is_stochastic(spec)) {
        sampling = FieldSampling{field_mc, field_opts.seed};
      }
    }
    write_output(field_opts.out, field_format == "json"
                                     ? field_to_json(field, sampling)
                                     : field_to_csv(field, sampling));
  });

  // --- attractors ----------------------------------------------------------
  auto* attractors_cmd = app.add_subcommand(
      "attractors", "Rest points with stability classification (JSON)");
  CommonOpts attractors_opts;
  add_common_options(attractors_cmd, attractors_opts);
  int seed_resolution = 20;
  double classify_tol = 1e-8;
  attractors_cmd
      ->add_option("--seed-resolution", seed_resolution,
                   "Search lattice subdivisions")
      ->capture_default_str();
  attractors_cmd
      ->add_option("--tol", classify_tol, "Eigenvalue classification tolerance")
      ->capture_default_str();
  attractors_cmd->callback([&] {
    const GameParams params = make_params(attractors_opts);
    const PerceptionSpec spec = make_spec(attractors_opts);
    const FixedPointSearch search =
        find_fixed_points(params, spec, seed_resolution, classify_tol);
    write_output(attractors_opts.out, fixed_points_to_json(search));
  });

  // --- basins --------------------------------------------------------------
  auto* basins_cmd = app.add_subcommand(
      "basins", "Basin-of-attraction map over the simplex lattice");
  CommonOpts basins_opts;
  add_common_options(basins_cmd, basins_opts);
  std::string basins_dynamics = "replicator";
  int basins_resolution = 100;
  int basins_mc = 1000;
  std::string basins_format = "json";
  basins_cmd->add_option("--dynamics", basins_dynamics, "Dynamics layer")
      ->check(CLI::IsMember({"replicator", "moran"}))
      ->capture_default_str();
  basins_cmd->add_option("--resolution", basins_resolution, "Lattice subdivisions")
      ->capture_default_str();
  basins_cmd
      ->add_option("--mc-samples", basins_mc,
                   "Monte-Carlo draws per drift estimate for noisy specs")
      ->capture_default_str();
  basins_cmd
      ->add_option("--format", basins_format,
                   "json: fraction summary; csv: per-cell labels")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  basins_cmd->callback([&] {
    const GameParams params = make_params(basins_opts);
    const PerceptionSpec spec = make_spec(basins_opts);
    BasinOptions options;
    options.mc_samples = basins_mc;
    options.seed = basins_opts.seed;
    const BasinReport report =
        basin_map(params, spec, basins_resolution,
                  basins_dynamics == "replicator"
                      ? BasinDynamics::Replicator
                      : BasinDynamics::MoranExpectedMotion,
                  options);
    write_output(basins_opts.out, basins_format == "csv"
                                      ? basin_to_csv(report)
                                      : basin_summary_to_json(report));
  });

  // --- threshold -----------------------------------------------------------
  auto* threshold_cmd = app.add_subcommand(
      "threshold", "Critical monitor mass on the defector/monitor edge (JSON)");
  CommonOpts threshold_opts;
  add_common_options(threshold_cmd, threshold_opts);
  int threshold_mc = 10000;
  double threshold_tol = 1e-9;
  threshold_cmd
      ->add_option("--mc-samples", threshold_mc,
                   "Frozen draws for noisy-spec bisection")
      ->capture_default_str();
  threshold_cmd->add_option("--tol", threshold_tol, "Bisection tolerance")
      ->capture_default_str();
  threshold_cmd->callback([&] {
    const GameParams params = make_params(threshold_opts);
    const PerceptionSpec spec = make_spec(threshold_opts);
    ThresholdOptions options;
    options.mc_samples = threshold_mc;
    options.seed = threshold_opts.seed;
    options.tol = threshold_tol;
    write_output(threshold_opts.out,
                 threshold_to_json(edge_threshold(params, spec, options)));
  });

  // --- sweep ---------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Edge thresholds for several perception specs (JSON lines)");
  CommonOpts sweep_opts;
  add_common_options(sweep_cmd, sweep_opts);
  std::vector<std::string> sweep_specs;
  int sweep_mc = 10000;
  double sweep_tol = 1e-9;
  sweep_cmd->remove_option(sweep_cmd->get_option("--perception"));
  sweep_cmd
      ->add_option("--perception", sweep_specs,
                   "Perception specs to sweep (repeatable)")
      ->required()
      ->take_all();
  sweep_cmd
      ->add_option("--mc-samples", sweep_mc,
                   "Frozen draws for noisy-spec bisection")
      ->capture_default_str();
  sweep_cmd->add_option("--tol", sweep_tol, "Bisection tolerance")
      ->capture_default_str();
  sweep_cmd->callback([&] {
    const GameParams params = make_params(sweep_opts);
    std::vector<PerceptionSpec> specs;
    specs.reserve(sweep_specs.size());
    for (const auto& text : sweep_specs) specs.push_back(spec_from_string(text));
    ThresholdOptions options;
    options.mc_samples = sweep_mc;
    options.seed = sweep_opts.seed;
    options.tol = sweep_tol;
    write_output(sweep_opts.out, threshold_sweep_to_json_lines(
                                     threshold_sweep(params, specs, options)));
  });

  // --- simulate ------------------------------------------------------------
  auto* simulate_cmd = app.add_subcommand(
      "simulate", "Sample one finite-population run (CSV trajectory)");
  CommonOpts simulate_opts;
  add_common_options(simulate_cmd, simulate_opts);
  std::string simulate_start;
  long simulate_steps = 10000;
  std::string noise_binding = "per-evaluation";
  simulate_cmd->add_option(
      "--start", simulate_start,
      "Start composition k_d,k_c,k_cm (default: balanced)");
  simulate_cmd->add_option("--steps", simulate_steps, "Number of chain steps")
      ->capture_default_str();
  simulate_cmd
      ->add_option("--noise-binding", noise_binding,
                   "When noisy estimates are redrawn")
      ->check(CLI::IsMember({"per-evaluation", "per-agent"}))
      ->capture_default_str();
  simulate_cmd->callback([&] {
    const GameParams params = make_params(simulate_opts);
    const PerceptionSpec spec = make_spec(simulate_opts);
    MoranConfig config;
    config.seed = simulate_opts.seed;
    config.noise_binding = noise_binding == "per-agent"
                               ? MoranConfig::NoiseBinding::PerAgentFixed
                               : MoranConfig::NoiseBinding::PerEvaluation;
    const CountState start = simulate_start.empty()
                                 ? balanced_start(params.z_pop)
                                 : parse_start(simulate_start, params.z_pop);
    SeededRng rng(simulate_opts.seed);
    const auto path = simulate(start, params, spec, config, simulate_steps, rng);
    write_output(simulate_opts.out, trajectory_to_csv(path));
  });

  // --- stationary ----------------------------------------------------------
  auto* stationary_cmd = app.add_subcommand(
      "stationary", "Stationary distribution of the full chain");
  CommonOpts stationary_opts;
  add_common_options(stationary_cmd, stationary_opts);
  int stationary_mc = 1000;
  std::string stationary_format = "csv";
  std::string matrix_out;
  stationary_cmd
      ->add_option("--mc-samples", stationary_mc,
                   "Monte-Carlo draws per rate for noisy specs")
      ->capture_default_str();
  stationary_cmd->add_option("--format", stationary_format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  stationary_cmd->add_option(
      "--matrix-out", matrix_out,
      "Also write the transition matrix (.json for JSON, else dense CSV)");
  stationary_cmd->callback([&] {
    const GameParams params = make_params(stationary_opts);
    const PerceptionSpec spec = make_spec(stationary_opts);
    MoranConfig config;
    config.mc_samples = stationary_mc;
    config.seed = stationary_opts.seed;
    const TransitionMatrix matrix = transition_matrix(params, spec, config);
    const StationaryResult result = stationary_distribution(matrix);
    if (!matrix_out.empty()) {
      const bool as_json = matrix_out.size() >= 5 &&
                           matrix_out.compare(matrix_out.size() - 5, 5,
                                              ".json") == 0;
      write_output(matrix_out,
                   as_json ? matrix_to_json(matrix) : matrix_to_csv(matrix));
    }
    write_output(stationary_opts.out,
                 stationary_format == "json"
                     ? stationary_to_json(matrix, result)
                     : stationary_to_csv(matrix, result));
  });

  // --- render --------------------------------------------------------------
  auto* render_cmd = app.add_subcommand(
      "render", "Ternary-plot SVG of the drift field and rest points");
  CommonOpts render_opts;
  add_common_options(render_cmd, render_opts);
  std::string render_dynamics = "replicator";
  int render_resolution = 20;
  int render_mc = 1000;
  render_cmd->add_option("--dynamics", render_dynamics, "Dynamics layer")
      ->check(CLI::IsMember({"replicator", "moran"}))
      ->capture_default_str();
  render_cmd->add_option("--resolution", render_resolution, "Lattice subdivisions")
      ->capture_default_str();
  render_cmd
      ->add_option("--mc-samples", render_mc,
                   "Monte-Carlo draws per drift estimate for noisy specs")
      ->capture_default_str();
  render_cmd->callback([&] {
    const GameParams params = make_params(render_opts);
    const PerceptionSpec spec = make_spec(render_opts);
    GradientField field;
    if (render_dynamics == "replicator") {
      field = gradient_field(params, spec, render_resolution);
    } else {
      MoranConfig config;
      config.mc_samples = render_mc;
      config.seed = render_opts.seed;
      field = drift_field(params, spec, config, render_resolution);
    }
    std::vector<FixedPoint> markers;
    if (!is_stochastic(spec)) {
      markers = find_fixed_points(params, spec).points;
    }
    write_output(render_opts.out, render_simplex_svg(field, markers));
  });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    // --help lands here too; CLI11 reports it with exit code 0.
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) { return run_app(argc, argv); }
