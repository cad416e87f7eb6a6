#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "longmat/errors.hpp"
#include "longmat/format.hpp"

namespace longmat::cli {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError("section '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in section '" + section + "'");
  }
}

bool present(const YAML::Node& node, const char* key) {
  const auto v = node[key];
  return v && !v.IsNull();
}

double get_double(const YAML::Node& node, const std::string& section, const char* key) {
  try {
    const double v = node[key].as<double>();
    if (!std::isfinite(v)) throw ConfigError(section + "." + key + " must be finite");
    return v;
  } catch (const YAML::Exception&) {
    throw ConfigError(section + "." + key + " must be a number");
  }
}

double get_double(const YAML::Node& node, const std::string& section, const char* key, double fallback) {
  return present(node, key) ? get_double(node, section, key) : fallback;
}

std::optional<double> get_optional(const YAML::Node& node, const std::string& section, const char* key) {
  if (!present(node, key)) return std::nullopt;
  return get_double(node, section, key);
}

double require_double(const YAML::Node& node, const std::string& section, const char* key) {
  if (!present(node, key)) throw ConfigError("missing required key " + section + "." + key);
  return get_double(node, section, key);
}

long long get_int(const YAML::Node& node, const std::string& section, const char* key, long long fallback) {
  if (!present(node, key)) return fallback;
  try {
    return node[key].as<long long>();
  } catch (const YAML::Exception&) {
    throw ConfigError(section + "." + key + " must be an integer");
  }
}

std::size_t get_count(const YAML::Node& node, const std::string& section, const char* key, std::size_t fallback) {
  const long long v = get_int(node, section, key, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError(section + "." + key + " must be >= 0");
  return static_cast<std::size_t>(v);
}

bool get_bool(const YAML::Node& node, const std::string& section, const char* key, bool fallback) {
  if (!present(node, key)) return fallback;
  try {
    return node[key].as<bool>();
  } catch (const YAML::Exception&) {
    throw ConfigError(section + "." + key + " must be true or false");
  }
}

std::string get_string(const YAML::Node& node, const std::string& section, const char* key,
                       const std::string& fallback) {
  if (!present(node, key)) return fallback;
  try {
    return node[key].as<std::string>();
  } catch (const YAML::Exception&) {
    throw ConfigError(section + "." + key + " must be a string");
  }
}

std::vector<double> get_list(const YAML::Node& node, const std::string& section, const char* key,
                             std::vector<double> fallback) {
  if (!present(node, key)) return fallback;
  const auto seq = node[key];
  if (!seq.IsSequence()) throw ConfigError(section + "." + key + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& item : seq) {
    try {
      out.push_back(item.as<double>());
    } catch (const YAML::Exception&) {
      throw ConfigError(section + "." + key + " must be a list of numbers");
    }
    if (!std::isfinite(out.back())) throw ConfigError(section + "." + key + " entries must be finite");
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return g;
}

ModelParams parse_model(const YAML::Node& node) {
  const std::string s = "model";
  if (!node) throw ConfigError("missing section 'model'");
  const auto type = get_string(node, s, "type", "");
  if (type == "bm") {
    check_keys(node, s, {"type", "z0", "sigma", "mu"});
    return BrownianParams{get_double(node, s, "z0", 0.0), require_double(node, s, "sigma"),
                          get_double(node, s, "mu", 0.0)};
  }
  if (type == "nig") {
    check_keys(node, s, {"type", "z0", "theta", "mu", "delta", "b"});
    return NigParams{get_double(node, s, "z0", 0.0), get_double(node, s, "theta", 0.0),
                     require_double(node, s, "mu"), require_double(node, s, "delta"),
                     get_double(node, s, "b", 0.0)};
  }
  if (type == "vg") {
    check_keys(node, s, {"type", "z0", "sigma", "theta", "m", "lambda"});
    return VarianceGammaParams{get_double(node, s, "z0", 0.0), require_double(node, s, "sigma"),
                               get_double(node, s, "theta", 0.0), get_double(node, s, "m", 0.0),
                               require_double(node, s, "lambda")};
  }
  throw ConfigError("model.type must be one of bm, nig, vg");
}

PayoffSection parse_payoff(const YAML::Node& node) {
  const std::string s = "payoff";
  if (!node) throw ConfigError("missing section 'payoff'");
  check_keys(node, s, {"type", "strike", "offsets", "barrier", "approximation", "conditions"});
  const auto type = get_string(node, s, "type", "");
  const double k = require_double(node, s, "strike");
  PayoffSection out;
  std::string default_approx;
  if (type == "discrete_asian" || type == "discrete_lookback") {
    if (!present(node, "offsets")) throw ConfigError("payoff.offsets is required for " + type);
    if (present(node, "barrier")) throw ConfigError("payoff.barrier only applies to partial_barrier");
    const auto offsets = get_list(node, s, "offsets", {});
    if (type == "discrete_asian") {
      out.payoff = DiscreteAsian{offsets, k};
      default_approx = "vanilla_basket";
    } else {
      out.payoff = DiscreteLookback{offsets, k};
      default_approx = "scaled_vanilla";
    }
  } else if (type == "integral_asian") {
    if (present(node, "offsets") || present(node, "barrier")) {
      throw ConfigError("integral_asian takes neither offsets nor barrier");
    }
    out.payoff = IntegralAsian{k};
    default_approx = "strike_profile";
  } else if (type == "partial_barrier") {
    if (present(node, "offsets")) throw ConfigError("partial_barrier takes no offsets");
    out.payoff = PartialBarrier{k, require_double(node, s, "barrier")};
    default_approx = "gap_call";
  } else {
    throw ConfigError("payoff.type must be one of discrete_asian, integral_asian, discrete_lookback, partial_barrier");
  }

  const auto an = node["approximation"];
  const std::string as = "payoff.approximation";
  std::string atype = default_approx;
  if (an && !an.IsNull()) {
    check_keys(an, as, {"type", "strikes", "c_h"});
    atype = get_string(an, as, "type", default_approx);
  }
  const YAML::Node empty;
  const YAML::Node& a = (an && !an.IsNull()) ? an : empty;
  if (atype != "scaled_vanilla" && a && present(a, "c_h")) throw ConfigError("c_h only applies to scaled_vanilla");
  if (atype == "vanilla_basket") {
    const auto* asian = std::get_if<DiscreteAsian>(&out.payoff);
    const std::size_t n = asian ? asian->offsets.size() : 0;
    out.approximation = VanillaBasket{get_list(a, as, "strikes", std::vector<double>(n, k))};
  } else if (atype == "strike_profile") {
    out.approximation = StrikeProfileBasket{get_list(a, as, "strikes", {})};
  } else if (atype == "scaled_vanilla") {
    if (a && present(a, "strikes")) throw ConfigError("scaled_vanilla takes no strikes");
    out.approximation = ScaledVanilla{a ? get_double(a, as, "c_h", kNan) : kNan, k};
  } else if (atype == "gap_call") {
    if (a && present(a, "strikes")) throw ConfigError("gap_call takes no strikes");
    const auto* b = std::get_if<PartialBarrier>(&out.payoff);
    out.approximation = GapCall{k, b ? b->barrier : kNan};
  } else if (atype == "exact_copy") {
    if (a && present(a, "strikes")) throw ConfigError("exact_copy takes no strikes");
    out.approximation = ExactCopy{};
  } else {
    throw ConfigError(
        "payoff.approximation.type must be one of vanilla_basket, strike_profile, scaled_vanilla, gap_call, exact_copy");
  }

  const auto cn = node["conditions"];
  if (cn && !cn.IsNull()) {
    const std::string cs = "payoff.conditions";
    check_keys(cn, cs, {"m_upper", "m_lower", "slack"});
    ConditionMeta meta;
    meta.m_upper = get_double(cn, cs, "m_upper", meta.m_upper);
    meta.m_lower = get_double(cn, cs, "m_lower", meta.m_lower);
    meta.slack = get_double(cn, cs, "slack", meta.slack);
    out.conditions = meta;
  }

  // Validate the pair now; an unestimated C_h is replaced by a placeholder.
  Approximation probe = out.approximation;
  if (auto* sv = std::get_if<ScaledVanilla>(&probe); sv && std::isnan(sv->c_h)) sv->c_h = 1.0;
  (void)PayoffPair(out.payoff, probe, out.conditions);
  return out;
}

ScheduleSection parse_schedule(const YAML::Node& node) {
  const std::string s = "schedule";
  ScheduleSection out;
  out.alpha_times = log_grid(0.1, 1000.0, 21);
  out.alpha_z = {-1.0, -0.5, 0.0, 0.5, 1.0};
  out.maturities = {40.0, 80.0};
  if (!node || node.IsNull()) {
    out.window_steps = default_window_steps(out.tau);
    return out;
  }
  check_keys(node, s, {"maturities", "tau", "window_steps", "resolutions", "alpha_times", "alpha_z"});
  out.tau = get_double(node, s, "tau", out.tau);
  if (!(out.tau > 0.0)) throw ConfigError("schedule.tau must be > 0");
  out.maturities = get_list(node, s, "maturities", out.maturities);
  if (out.maturities.empty()) throw ConfigError("schedule.maturities must not be empty");
  for (std::size_t i = 0; i < out.maturities.size(); ++i) {
    if (!(out.maturities[i] > out.tau) || (i > 0 && !(out.maturities[i] > out.maturities[i - 1]))) {
      throw ConfigError("schedule.maturities must be increasing and > tau");
    }
  }
  const long long steps = get_int(node, s, "window_steps", 0);
  if (steps < 0 || steps > 10000000) throw ConfigError("schedule.window_steps must be in [0, 1e7]");
  out.window_steps = steps == 0 ? default_window_steps(out.tau) : static_cast<int>(steps);
  if (present(node, "resolutions")) {
    out.resolutions.clear();
    for (double r : get_list(node, s, "resolutions", {})) {
      if (r < 1.0 || r != std::floor(r) || r > 64.0) throw ConfigError("schedule.resolutions must be integers in [1, 64]");
      out.resolutions.push_back(static_cast<int>(r));
    }
    if (out.resolutions.empty()) throw ConfigError("schedule.resolutions must not be empty");
  }
  out.alpha_times = get_list(node, s, "alpha_times", out.alpha_times);
  for (double t : out.alpha_times) {
    if (!(t > 0.0)) throw ConfigError("schedule.alpha_times must be > 0");
  }
  out.alpha_z = get_list(node, s, "alpha_z", out.alpha_z);
  return out;
}

NumericsSection parse_numerics(const YAML::Node& node) {
  const std::string s = "numerics";
  NumericsSection out;
  out.reflection_a = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  if (!node || node.IsNull()) return out;
  check_keys(node, s,
             {"n_paths", "quadrature_nodes", "max_evaluations", "truncation_tol", "z_lo", "z_hi", "seed",
              "allow_experimental", "discount_rate", "target_ratio_stderr", "c_h_paths", "reflection_paths",
              "reflection_steps", "reflection_a", "validation_samples", "vanilla_paths"});
  out.n_paths = get_count(node, s, "n_paths", out.n_paths);
  if (out.n_paths < 10000) throw ConfigError("numerics.n_paths must be >= 10000");
  out.quadrature_nodes = static_cast<int>(get_int(node, s, "quadrature_nodes", out.quadrature_nodes));
  if (out.quadrature_nodes < 1 || out.quadrature_nodes > 64) throw ConfigError("numerics.quadrature_nodes must be in [1, 64]");
  out.max_evaluations = static_cast<int>(get_int(node, s, "max_evaluations", out.max_evaluations));
  if (out.max_evaluations < out.quadrature_nodes) throw ConfigError("numerics.max_evaluations must be >= quadrature_nodes");
  out.truncation_tol = get_double(node, s, "truncation_tol", out.truncation_tol);
  if (!(out.truncation_tol > 0.0)) throw ConfigError("numerics.truncation_tol must be > 0");
  out.z_lo = get_optional(node, s, "z_lo");
  out.z_hi = get_optional(node, s, "z_hi");
  if (out.z_lo.has_value() != out.z_hi.has_value()) throw ConfigError("numerics.z_lo and z_hi must be set together");
  if (out.z_lo && !(*out.z_hi > *out.z_lo)) throw ConfigError("numerics.z_lo must be < z_hi");
  if (present(node, "seed")) {
    try {
      out.seed = node["seed"].as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      throw ConfigError("numerics.seed must be an unsigned 64-bit integer");
    }
  }
  out.allow_experimental = get_bool(node, s, "allow_experimental", out.allow_experimental);
  out.discount_rate = get_double(node, s, "discount_rate", out.discount_rate);
  out.target_ratio_stderr = get_optional(node, s, "target_ratio_stderr");
  if (out.target_ratio_stderr && !(*out.target_ratio_stderr > 0.0)) {
    throw ConfigError("numerics.target_ratio_stderr must be > 0");
  }
  out.c_h_paths = get_count(node, s, "c_h_paths", out.c_h_paths);
  if (out.c_h_paths < 10000) throw ConfigError("numerics.c_h_paths must be >= 10000");
  out.reflection_paths = get_count(node, s, "reflection_paths", out.reflection_paths);
  if (out.reflection_paths < 100) throw ConfigError("numerics.reflection_paths must be >= 100");
  out.reflection_steps = static_cast<int>(get_int(node, s, "reflection_steps", out.reflection_steps));
  if (out.reflection_steps < 1) throw ConfigError("numerics.reflection_steps must be >= 1");
  out.reflection_a = get_list(node, s, "reflection_a", out.reflection_a);
  for (double a : out.reflection_a) {
    if (!(a > 0.0)) throw ConfigError("numerics.reflection_a entries must be > 0");
  }
  out.validation_samples = get_count(node, s, "validation_samples", out.validation_samples);
  if (out.validation_samples < 1000) throw ConfigError("numerics.validation_samples must be >= 1000");
  out.vanilla_paths = get_count(node, s, "vanilla_paths", out.vanilla_paths);
  if (out.vanilla_paths < 1000) throw ConfigError("numerics.vanilla_paths must be >= 1000");
  return out;
}

OutputSection parse_output(const YAML::Node& node) {
  const std::string s = "output";
  OutputSection out;
  if (!node || node.IsNull()) return out;
  check_keys(node, s, {"directory", "formats"});
  out.directory = get_string(node, s, "directory", out.directory);
  if (out.directory.empty()) throw ConfigError("output.directory must not be empty");
  if (present(node, "formats")) {
    const auto f = node["formats"];
    if (!f.IsSequence()) throw ConfigError("output.formats must be a list");
    out.formats.clear();
    for (const auto& item : f) {
      const auto name = item.as<std::string>();
      if (name != "csv") throw ConfigError("output.formats: unsupported format '" + name + "' (csv only)");
      out.formats.push_back(name);
    }
    if (out.formats.empty()) throw ConfigError("output.formats must not be empty");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

std::string num(double v) { return format_g17(v); }

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : "null"; }

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping with sections model, payoff, ...");
  check_keys(root, "<root>", {"model", "payoff", "schedule", "numerics", "output"});
  RunConfig cfg;
  cfg.model = parse_model(root["model"]);
  cfg.payoff = parse_payoff(root["payoff"]);
  cfg.schedule = parse_schedule(root["schedule"]);
  cfg.numerics = parse_numerics(root["numerics"]);
  cfg.output = parse_output(root["output"]);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

bool needs_c_h(const RunConfig& config) {
  const auto* sv = std::get_if<ScaledVanilla>(&config.payoff.approximation);
  return sv && std::isnan(sv->c_h);
}

PayoffPair make_pair(const RunConfig& config) {
  if (needs_c_h(config)) throw ConfigError("scaled vanilla C_h has not been estimated");
  return PayoffPair(config.payoff.payoff, config.payoff.approximation, config.payoff.conditions);
}

std::string emit_config(const RunConfig& c) {
  std::ostringstream os;
  os << "model:\n";
  std::visit(overloaded{
                 [&](const BrownianParams& p) {
                   os << "  type: bm\n  z0: " << num(p.z0) << "\n  sigma: " << num(p.sigma) << "\n  mu: " << num(p.mu)
                      << "\n";
                 },
                 [&](const NigParams& p) {
                   os << "  type: nig\n  z0: " << num(p.z0) << "\n  theta: " << num(p.theta) << "\n  mu: " << num(p.mu)
                      << "\n  delta: " << num(p.delta) << "\n  b: " << num(p.b) << "\n";
                 },
                 [&](const VarianceGammaParams& p) {
                   os << "  type: vg\n  z0: " << num(p.z0) << "\n  sigma: " << num(p.sigma)
                      << "\n  theta: " << num(p.theta) << "\n  m: " << num(p.m) << "\n  lambda: " << num(p.lambda)
                      << "\n";
                 },
             },
             c.model.params());

  os << "payoff:\n";
  std::visit(overloaded{
                 [&](const DiscreteAsian& p) {
                   os << "  type: discrete_asian\n  strike: " << num(p.strike) << "\n  offsets: " << list(p.offsets)
                      << "\n";
                 },
                 [&](const IntegralAsian& p) { os << "  type: integral_asian\n  strike: " << num(p.strike) << "\n"; },
                 [&](const DiscreteLookback& p) {
                   os << "  type: discrete_lookback\n  strike: " << num(p.strike) << "\n  offsets: " << list(p.offsets)
                      << "\n";
                 },
                 [&](const PartialBarrier& p) {
                   os << "  type: partial_barrier\n  strike: " << num(p.strike) << "\n  barrier: " << num(p.barrier)
                      << "\n";
                 },
             },
             c.payoff.payoff);
  os << "  approximation:\n";
  std::visit(overloaded{
                 [&](const ScaledVanilla& a) {
                   os << "    type: scaled_vanilla\n    c_h: " << (std::isnan(a.c_h) ? "null" : num(a.c_h)) << "\n";
                 },
                 [&](const VanillaBasket& a) { os << "    type: vanilla_basket\n    strikes: " << list(a.strikes) << "\n"; },
                 [&](const StrikeProfileBasket& a) {
                   os << "    type: strike_profile\n    strikes: " << list(a.strikes) << "\n";
                 },
                 [&](const GapCall&) { os << "    type: gap_call\n"; },
                 [&](const ExactCopy&) { os << "    type: exact_copy\n"; },
             },
             c.payoff.approximation);
  if (c.payoff.conditions) {
    const auto& m = *c.payoff.conditions;
    os << "  conditions:\n    m_upper: " << (std::isinf(m.m_upper) ? ".inf" : num(m.m_upper))
       << "\n    m_lower: " << num(m.m_lower) << "\n    slack: " << num(m.slack) << "\n";
  }

  const auto& s = c.schedule;
  std::vector<double> res(s.resolutions.begin(), s.resolutions.end());
  os << "schedule:\n  maturities: " << list(s.maturities) << "\n  tau: " << num(s.tau)
     << "\n  window_steps: " << s.window_steps << "\n  resolutions: " << list(res)
     << "\n  alpha_times: " << list(s.alpha_times) << "\n  alpha_z: " << list(s.alpha_z) << "\n";

  const auto& n = c.numerics;
  os << "numerics:\n  n_paths: " << n.n_paths << "\n  quadrature_nodes: " << n.quadrature_nodes
     << "\n  max_evaluations: " << n.max_evaluations << "\n  truncation_tol: " << num(n.truncation_tol)
     << "\n  z_lo: " << opt(n.z_lo) << "\n  z_hi: " << opt(n.z_hi) << "\n  seed: " << n.seed
     << "\n  allow_experimental: " << (n.allow_experimental ? "true" : "false")
     << "\n  discount_rate: " << num(n.discount_rate) << "\n  target_ratio_stderr: " << opt(n.target_ratio_stderr)
     << "\n  c_h_paths: " << n.c_h_paths << "\n  reflection_paths: " << n.reflection_paths
     << "\n  reflection_steps: " << n.reflection_steps << "\n  reflection_a: " << list(n.reflection_a)
     << "\n  validation_samples: " << n.validation_samples << "\n  vanilla_paths: " << n.vanilla_paths << "\n";

  std::string dir;
  for (char ch : c.output.directory) {
    if (ch == '"' || ch == '\\') dir += '\\';
    dir += ch;
  }
  os << "output:\n  directory: \"" << dir << "\"\n  formats: [";
  for (std::size_t i = 0; i < c.output.formats.size(); ++i) os << (i ? ", " : "") << c.output.formats[i];
  os << "]\n";
  return os.str();
}

}  // namespace longmat::cli
