#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "longmat/levy_models.hpp"
#include "longmat/payoffs.hpp"

namespace longmat::cli {

struct PayoffSection {
  Payoff payoff;
  Approximation approximation;
  std::optional<ConditionMeta> conditions;
};

struct ScheduleSection {
  std::vector<double> maturities;
  double tau = 1.0;
  int window_steps = 0;  // resolved to the default on load
  std::vector<int> resolutions{1, 4};
  std::vector<double> alpha_times;
  std::vector<double> alpha_z;
};

struct NumericsSection {
  std::size_t n_paths = 100000;
  int quadrature_nodes = 16;
  int max_evaluations = 512;
  double truncation_tol = 1e-10;
  std::optional<double> z_lo;
  std::optional<double> z_hi;
  std::uint64_t seed = 1;
  bool allow_experimental = false;
  double discount_rate = 0.0;
  std::optional<double> target_ratio_stderr;
  std::size_t c_h_paths = 100000;
  std::size_t reflection_paths = 100000;
  int reflection_steps = 252;
  std::vector<double> reflection_a;
  std::size_t validation_samples = 10000;
  std::size_t vanilla_paths = 1000000;
};

struct OutputSection {
  std::string directory = "out";
  std::vector<std::string> formats{"csv"};
};

struct RunConfig {
  ModelParams model = BrownianParams{0.0, 0.2, 0.0};
  PayoffSection payoff;
  ScheduleSection schedule;
  NumericsSection numerics;
  OutputSection output;
};

/// Parses and validates a YAML document. Unknown keys, wrong types and
/// invalid values raise ConfigError before anything is computed.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Fully resolved configuration (defaults included) as YAML with 17-digit
/// numbers. Loading it again yields the same RunConfig.
std::string emit_config(const RunConfig& config);

/// True when the approximation is a scaled vanilla whose C_h still has to be
/// estimated (given as null or omitted).
bool needs_c_h(const RunConfig& config);

PayoffPair make_pair(const RunConfig& config);

}  // namespace longmat::cli
