#include "instboot/serialize.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

namespace instboot {

using nlohmann::json;

std::string format_double17(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  if (res.ec != std::errc()) {
    throw std::runtime_error("format_double17: conversion failed");
  }
  return std::string(buf, res.ptr);
}

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* what) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::domain_error(std::string("unknown ") + what + " key: \"" +
                              item.key() + "\"");
    }
  }
}

double read_number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) {
    throw std::domain_error(std::string("key \"") + key + "\" must be a number");
  }
  return v.get<double>();
}

int read_int(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) {
    throw std::domain_error(std::string("key \"") + key +
                            "\" must be an integer");
  }
  return v.get<int>();
}

json point_to_json(const FrequencyVector& x) {
  return json{{"x_d", x.x_d}, {"x_c", x.x_c}, {"x_cm", x.x_cm}};
}

json spec_to_json_value(const PerceptionSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Identity>) {
          return json{{"kind", "identity"}};
        } else if constexpr (std::is_same_v<T, CoarseBias>) {
          return json{{"kind", "coarse"}, {"factor", s.factor}};
        } else if constexpr (std::is_same_v<T, Prelec>) {
          return json{{"kind", "prelec"},
                      {"zeta", s.zeta},
                      {"lambda", s.lambda},
                      {"target", s.target == PrelecTarget::PerCheckProb
                                     ? "per_check"
                                     : "total_expectation"}};
        } else if constexpr (std::is_same_v<T, ProportionalNoise>) {
          return json{{"kind", "propnoise"},
                      {"lo", s.lo},
                      {"hi", s.hi},
                      {"scheme", s.scheme == NoiseScheme::TwoSidedUniform
                                     ? "two_sided"
                                     : "log_uniform"}};
        } else {
          static_assert(std::is_same_v<T, AbsoluteNoise>);
          return json{{"kind", "absnoise"},
                      {"width", s.width},
                      {"clamp_at_zero", s.clamp_at_zero}};
        }
      },
      spec);
}

PerceptionSpec spec_from_json_value(const json& j) {
  if (!j.is_object()) {
    throw std::domain_error("perception spec must be a JSON object");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "identity") {
    reject_unknown_keys(j, {"kind"}, "perception");
    return Identity{};
  }
  if (kind == "coarse") {
    reject_unknown_keys(j, {"kind", "factor"}, "perception");
    CoarseBias s;
    s.factor = read_number(j, "factor");
    return s;
  }
  if (kind == "prelec") {
    reject_unknown_keys(j, {"kind", "zeta", "lambda", "target"}, "perception");
    Prelec s;
    s.zeta = read_number(j, "zeta");
    s.lambda = read_number(j, "lambda");
    if (j.contains("target")) {
      const std::string target = j.at("target").get<std::string>();
      if (target == "per_check") {
        s.target = PrelecTarget::PerCheckProb;
      } else if (target == "total_expectation") {
        s.target = PrelecTarget::TotalExpectation;
      } else {
        throw std::domain_error("prelec target must be \"per_check\" or "
                                "\"total_expectation\"");
      }
    }
    return s;
  }
  if (kind == "propnoise") {
    reject_unknown_keys(j, {"kind", "lo", "hi", "scheme"}, "perception");
    ProportionalNoise s;
    s.lo = read_number(j, "lo");
    s.hi = read_number(j, "hi");
    if (j.contains("scheme")) {
      const std::string scheme = j.at("scheme").get<std::string>();
      if (scheme == "two_sided") {
        s.scheme = NoiseScheme::TwoSidedUniform;
      } else if (scheme == "log_uniform") {
        s.scheme = NoiseScheme::LogUniform;
      } else {
        throw std::domain_error(
            "propnoise scheme must be \"two_sided\" or \"log_uniform\"");
      }
    }
    return s;
  }
  if (kind == "absnoise") {
    reject_unknown_keys(j, {"kind", "width", "clamp_at_zero"}, "perception");
    AbsoluteNoise s;
    s.width = read_number(j, "width");
    if (j.contains("clamp_at_zero")) {
      if (!j.at("clamp_at_zero").is_boolean()) {
        throw std::domain_error("clamp_at_zero must be a boolean");
      }
      s.clamp_at_zero = j.at("clamp_at_zero").get<bool>();
    }
    return s;
  }
  throw std::domain_error("unknown perception kind: \"" + kind + "\"");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (const char c : text) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::domain_error("invalid number \"" + text + "\" in " + what);
  }
}

}  // namespace

std::string params_to_json(const GameParams& p) {
  const json j{{"alpha", p.alpha},     {"beta", p.beta},
               {"delta", p.delta},     {"p_checks", p.p_checks},
               {"s", p.s},             {"n_group", p.n_group},
               {"z_pop", p.z_pop},     {"gamma", p.gamma},
               {"mu", p.mu}};
  return j.dump() + "\n";
}

void apply_params_json(GameParams& base, const std::string& text) {
  const json j = json::parse(text);
  if (!j.is_object()) {
    throw std::domain_error("GameParams JSON must be an object");
  }
  reject_unknown_keys(j,
                      {"alpha", "beta", "delta", "p_checks", "s", "n_group",
                       "z_pop", "gamma", "mu"},
                      "GameParams");
  if (j.contains("alpha")) base.alpha = read_number(j, "alpha");
  if (j.contains("beta")) base.beta = read_number(j, "beta");
  if (j.contains("delta")) base.delta = read_number(j, "delta");
  if (j.contains("p_checks")) base.p_checks = read_number(j, "p_checks");
  if (j.contains("s")) base.s = read_number(j, "s");
  if (j.contains("n_group")) base.n_group = read_int(j, "n_group");
  if (j.contains("z_pop")) base.z_pop = read_int(j, "z_pop");
  if (j.contains("gamma")) base.gamma = read_number(j, "gamma");
  if (j.contains("mu")) base.mu = read_number(j, "mu");
}

GameParams params_from_json(const std::string& text) {
  GameParams params;
  apply_params_json(params, text);
  params.validate();
  return params;
}

std::string spec_to_json(const PerceptionSpec& spec) {
  return spec_to_json_value(spec).dump() + "\n";
}

PerceptionSpec spec_from_json(const std::string& text) {
  return spec_from_json_value(json::parse(text));
}

std::string spec_to_shorthand(const PerceptionSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Identity>) {
          return "identity";
        } else if constexpr (std::is_same_v<T, CoarseBias>) {
          return "coarse:" + format_double17(s.factor);
        } else if constexpr (std::is_same_v<T, Prelec>) {
          std::string out = "prelec:" + format_double17(s.zeta) + ":" +
                            format_double17(s.lambda);
          if (s.target == PrelecTarget::TotalExpectation) out += ":total";
          return out;
        } else if constexpr (std::is_same_v<T, ProportionalNoise>) {
          std::string out = "propnoise:" + format_double17(s.lo) + ":" +
                            format_double17(s.hi);
          if (s.scheme == NoiseScheme::LogUniform) out += ":log";
          return out;
        } else {
          static_assert(std::is_same_v<T, AbsoluteNoise>);
          std::string out = "absnoise:" + format_double17(s.width);
          if (s.clamp_at_zero) out += ":clamp";
          return out;
        }
      },
      spec);
}

PerceptionSpec spec_from_shorthand(const std::string& text) {
  const auto parts = split(text, ':');
  const std::string& kind = parts[0];
  const auto arity = [&](std::size_t lo, std::size_t hi) {
    if (parts.size() < lo + 1 || parts.size() > hi + 1) {
      throw std::domain_error("perception shorthand \"" + text +
                              "\" has the wrong number of parameters");
    }
  };
  if (kind == "identity") {
    arity(0, 0);
    return Identity{};
  }
  if (kind == "coarse") {
    arity(1, 1);
    return CoarseBias{parse_double(parts[1], "coarse shorthand")};
  }
  if (kind == "prelec") {
    arity(2, 3);
    Prelec s;
    s.zeta = parse_double(parts[1], "prelec shorthand");
    s.lambda = parse_double(parts[2], "prelec shorthand");
    if (parts.size() == 4) {
      if (parts[3] == "total") {
        s.target = PrelecTarget::TotalExpectation;
      } else if (parts[3] == "per_check") {
        s.target = PrelecTarget::PerCheckProb;
      } else {
        throw std::domain_error("prelec shorthand target must be "
                                "\"per_check\" or \"total\"");
      }
    }
    return s;
  }
  if (kind == "propnoise") {
    arity(2, 3);
    ProportionalNoise s;
    s.lo = parse_double(parts[1], "propnoise shorthand");
    s.hi = parse_double(parts[2], "propnoise shorthand");
    if (parts.size() == 4) {
      if (parts[3] == "log") {
        s.scheme = NoiseScheme::LogUniform;
      } else if (parts[3] == "two_sided") {
        s.scheme = NoiseScheme::TwoSidedUniform;
      } else {
        throw std::domain_error("propnoise shorthand scheme must be "
                                "\"two_sided\" or \"log\"");
      }
    }
    return s;
  }
  if (kind == "absnoise") {
    arity(1, 2);
    AbsoluteNoise s;
    s.width = parse_double(parts[1], "absnoise shorthand");
    if (parts.size() == 3) {
      if (parts[2] != "clamp") {
        throw std::domain_error(
            "absnoise shorthand only accepts \"clamp\" as a modifier");
      }
      s.clamp_at_zero = true;
    }
    return s;
  }
  throw std::domain_error("unknown perception shorthand: \"" + text + "\"");
}

PerceptionSpec spec_from_string(const std::string& text) {
  std::size_t first = 0;
  while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) {
    ++first;
  }
  if (first < text.size() && text[first] == '{') return spec_from_json(text);
  return spec_from_shorthand(text);
}

std::string run_config_to_json(const RunConfig& config) {
  const json j{{"params", json::parse(params_to_json(config.params))},
               {"perception", spec_to_json_value(config.perception)},
               {"seed", config.seed},
               {"resolution", config.resolution},
               {"mc_samples", config.mc_samples},
               {"steps", config.steps}};
  return j.dump() + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (!j.is_object()) {
    throw std::domain_error("RunConfig JSON must be an object");
  }
  reject_unknown_keys(
      j, {"params", "perception", "seed", "resolution", "mc_samples", "steps"},
      "RunConfig");
  RunConfig config;
  if (j.contains("params")) {
    apply_params_json(config.params, j.at("params").dump());
  }
  if (j.contains("perception")) {
    config.perception = spec_from_json_value(j.at("perception"));
  }
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("resolution")) config.resolution = read_int(j, "resolution");
  if (j.contains("mc_samples")) config.mc_samples = read_int(j, "mc_samples");
  if (j.contains("steps")) config.steps = j.at("steps").get<long>();
  config.params.validate();
  validate(config.perception);
  return config;
}

std::string field_to_csv(const GradientField& field,
                         const std::optional<FieldSampling>& sampling) {
  std::string out = "x_d,x_c,x_cm,dx_d,dx_c,dx_cm";
  if (sampling) out += ",samples,seed";
  out += "\n";
  for (std::size_t i = 0; i < field.points.size(); ++i) {
    const auto& x = field.points[i];
    const auto& v = field.vectors[i];
    out += format_double17(x.x_d) + "," + format_double17(x.x_c) + "," +
           format_double17(x.x_cm) + "," + format_double17(v[0]) + "," +
           format_double17(v[1]) + "," + format_double17(v[2]);
    if (sampling) {
      out += "," + std::to_string(sampling->samples) + "," +
             std::to_string(sampling->seed);
    }
    out += "\n";
  }
  return out;
}

std::string field_to_json(const GradientField& field,
                          const std::optional<FieldSampling>& sampling) {
  json points = json::array();
  for (std::size_t i = 0; i < field.points.size(); ++i) {
    const auto& x = field.points[i];
    const auto& v = field.vectors[i];
    points.push_back(json{{"x_d", x.x_d},
                          {"x_c", x.x_c},
                          {"x_cm", x.x_cm},
                          {"dx_d", v[0]},
                          {"dx_c", v[1]},
                          {"dx_cm", v[2]}});
  }
  json j{{"resolution", field.resolution}, {"points", std::move(points)}};
  if (sampling) {
    j["samples"] = sampling->samples;
    j["seed"] = sampling->seed;
  }
  return j.dump() + "\n";
}

std::string fixed_points_to_json(const FixedPointSearch& search) {
  json points = json::array();
  for (const auto& fp : search.points) {
    json eig = json::array();
    for (const auto& e : fp.eigenvalues) {
      eig.push_back(json{{"re", e.real()}, {"im", e.imag()}});
    }
    json entry = point_to_json(fp.location);
    entry["stability"] = to_string(fp.stability);
    entry["eigenvalues"] = std::move(eig);
    points.push_back(std::move(entry));
  }
  json non_converged = json::array();
  for (const auto& x : search.non_converged) {
    non_converged.push_back(point_to_json(x));
  }
  const json j{{"fixed_points", std::move(points)},
               {"non_converged", std::move(non_converged)}};
  return j.dump() + "\n";
}

std::string basin_to_csv(const BasinReport& report) {
  std::string out = "x_d,x_c,x_cm,label\n";
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    const auto& x = report.cells[i];
    out += format_double17(x.x_d) + "," + format_double17(x.x_c) + "," +
           format_double17(x.x_cm) + "," + to_string(report.labels[i]) + "\n";
  }
  return out;
}

std::string basin_summary_to_json(const BasinReport& report) {
  const json j{{"dynamics", to_string(report.dynamics)},
               {"resolution", report.resolution},
               {"cells", report.cells.size()},
               {"seed", report.seed},
               {"mc_samples", report.mc_samples},
               {"fraction_defection", report.fraction_defection},
               {"fraction_cooperative", report.fraction_cooperative},
               {"fraction_unresolved", report.fraction_unresolved}};
  return j.dump() + "\n";
}

std::string threshold_to_json(const ThresholdReport& report) {
  json j{{"perception", spec_to_json_value(report.spec)},
         {"method", report.method}};
  j["m_star"] = report.m_star ? json(*report.m_star) : json(nullptr);
  if (report.error) j["error"] = *report.error;
  return j.dump() + "\n";
}

std::string threshold_sweep_to_json_lines(
    const std::vector<ThresholdReport>& reports) {
  std::string out;
  for (const auto& report : reports) out += threshold_to_json(report);
  return out;
}

std::string trajectory_to_csv(const std::vector<CountState>& path) {
  std::string out = "step,k_d,k_c,k_cm\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(path[i].k_d) + "," +
           std::to_string(path[i].k_c) + "," + std::to_string(path[i].k_cm) +
           "\n";
  }
  return out;
}

std::string stationary_to_csv(const TransitionMatrix& matrix,
                              const StationaryResult& result) {
  std::string out = "k_d,k_c,k_cm,probability\n";
  for (std::size_t i = 0; i < matrix.states.size(); ++i) {
    const auto& st = matrix.states[i];
    out += std::to_string(st.k_d) + "," + std::to_string(st.k_c) + "," +
           std::to_string(st.k_cm) + "," + format_double17(result.pi[i]) + "\n";
  }
  return out;
}

std::string stationary_to_json(const TransitionMatrix& matrix,
                               const StationaryResult& result) {
  json dist = json::array();
  for (std::size_t i = 0; i < matrix.states.size(); ++i) {
    const auto& st = matrix.states[i];
    dist.push_back(json{{"k_d", st.k_d},
                        {"k_c", st.k_c},
                        {"k_cm", st.k_cm},
                        {"probability", result.pi[i]}});
  }
  const json j{{"z_pop", matrix.z_pop},
               {"converged", result.converged},
               {"residual", result.residual},
               {"iterations", result.iterations},
               {"distribution", std::move(dist)}};
  return j.dump() + "\n";
}

std::string matrix_to_csv(const TransitionMatrix& matrix) {
  std::string out = "# state,k_d,k_c,k_cm\n";
  for (std::size_t i = 0; i < matrix.states.size(); ++i) {
    const auto& st = matrix.states[i];
    out += "# " + std::to_string(i) + "," + std::to_string(st.k_d) + "," +
           std::to_string(st.k_c) + "," + std::to_string(st.k_cm) + "\n";
  }
  const std::size_t n = matrix.states.size();
  std::vector<double> dense(n, 0.0);
  for (std::size_t row = 0; row < n; ++row) {
    std::fill(dense.begin(), dense.end(), 0.0);
    for (const auto& [col, p] : matrix.rows[row]) {
      dense[static_cast<std::size_t>(col)] += p;
    }
    for (std::size_t col = 0; col < n; ++col) {
      out += format_double17(dense[col]);
      out += col + 1 < n ? "," : "\n";
    }
  }
  return out;
}

std::string matrix_to_json(const TransitionMatrix& matrix) {
  const std::size_t n = matrix.states.size();
  json states = json::array();
  for (const auto& st : matrix.states) {
    states.push_back(json::array({st.k_d, st.k_c, st.k_cm}));
  }
  json rows = json::array();
  std::vector<double> dense(n, 0.0);
  for (std::size_t row = 0; row < n; ++row) {
    std::fill(dense.begin(), dense.end(), 0.0);
    for (const auto& [col, p] : matrix.rows[row]) {
      dense[static_cast<std::size_t>(col)] += p;
    }
    rows.push_back(json(dense));
  }
  const json j{{"z_pop", matrix.z_pop},
               {"states", std::move(states)},
               {"rows", std::move(rows)}};
  return j.dump() + "\n";
}

}  // namespace instboot
