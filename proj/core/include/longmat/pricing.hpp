#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "longmat/asymptotics.hpp"
#include "longmat/levy_models.hpp"
#include "longmat/payoffs.hpp"
#include "longmat/price_estimate.hpp"

namespace longmat {

struct PricingOptions {
  std::size_t mc_paths = 1000000;  // VG marginals and exact-copy pairs
  std::uint64_t seed = 20240611;
  int window_steps = 0;
  unsigned workers = 1;
  double rel_tol = 1e-8;
};

/// E[(S_t - K)^+] undiscounted. BM closed form, NIG density quadrature, VG
/// Monte Carlo on the marginal. K = 0 gives E[S_t] in closed form.
PriceEstimate vanilla_price(const ModelParams& model, double t, double strike, const PricingOptions& opts = {});

/// Density-quadrature route for BM and NIG; NumericError when the integral
/// misses rel_tol.
PriceEstimate vanilla_price_quadrature(const ModelParams& model, double t, double strike, double rel_tol = 1e-8);

/// P(S_t >= level).
double digital_probability(const ModelParams& model, double t, double level);

/// A~(T) = E[g~((S_s)_{T - tau <= s <= T})] from marginal laws.
PriceEstimate approx_price_tilde(const ModelParams& model, const PayoffPair& pair, double maturity, double tau,
                                 const PricingOptions& opts = {});

/// A~(T) + C_err alpha(T - tau). ConsistencyError when c_err was computed for
/// a different (model, pair, tau).
PriceEstimate asymptotic_price(const ModelParams& model, const PayoffPair& pair, double maturity, double tau,
                               const ErrorConstant& c_err, const PricingOptions& opts = {});

struct StudyRow {
  double maturity = 0.0;
  int window_steps = 0;
  double a_mc = 0.0;             // A~ + mean(g - g~)
  double a_mc_stderr = 0.0;
  double a_mc_plain = 0.0;       // mean(g)
  double a_mc_plain_stderr = 0.0;
  double a_tilde = 0.0;
  double a_tilde_stderr = 0.0;
  double alpha_value = 0.0;
  double ratio = 0.0;            // (A_MC - A~) / alpha(T - tau)
  double ratio_stderr = 0.0;
};

struct StudyOptions {
  int window_steps = 0;
  std::vector<int> resolutions{1};  // multiples of window_steps to report
  unsigned workers = 1;
  std::optional<double> target_ratio_stderr;
  PricingOptions pricing;
  QuadratureConfig quadrature;
};

struct StudyTable {
  std::vector<StudyRow> rows;
  ErrorConstant error_constant;
};

/// R(T) for each maturity from the Monte Carlo oracle, with the error
/// constant for comparison. A_MC uses g~ as a control variate: the
/// simulated mean of g - g~ is added to the exact A~. The constant is
/// computed with the same seed unless supplied. BudgetError when a ratio
/// stderr misses target_ratio_stderr.
StudyTable ratio_convergence_study(const ModelParams& model, const PayoffPair& pair, double tau,
                                   const std::vector<double>& maturities, std::size_t n_paths, std::uint64_t seed,
                                   const StudyOptions& opts = {},
                                   const std::optional<ErrorConstant>& c_err = std::nullopt);

}  // namespace longmat
