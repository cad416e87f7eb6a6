#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "longmat/levy_models.hpp"

namespace longmat {

// ---------------------------------------------------------------------------
// Path windows
// ---------------------------------------------------------------------------

/// Uniform grid 0 = s_0 < ... < s_steps = tau.
std::vector<double> uniform_grid(double tau, int steps);

/// Default monitoring resolution: 252 steps per year, at least 16.
int default_window_steps(double tau);

/// A positive price path sampled on [0, tau]. Immutable after construction.
class PathWindow {
 public:
  PathWindow(double tau, std::vector<double> times, std::vector<double> values);

  /// Window on uniform_grid(tau, values.size() - 1).
  static PathWindow uniform(double tau, std::vector<double> values);

  double tau() const noexcept { return tau_; }
  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double inf() const;
  double sup() const;

  /// Same grid, values multiplied by a > 0.
  PathWindow scaled(double a) const;

 private:
  double tau_;
  std::vector<double> times_;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Payoff descriptors g
// ---------------------------------------------------------------------------

/// (1/N sum_i S_{T - tau_i} - K)^+, offsets measured back from maturity.
struct DiscreteAsian {
  std::vector<double> offsets;
  double strike = 0.0;
};

/// (1/tau int_{T-tau}^T S_s ds - K)^+, trapezoid rule on the window grid.
struct IntegralAsian {
  double strike = 0.0;
};

/// (max_i S_{T - tau_i} - K)^+
struct DiscreteLookback {
  std::vector<double> offsets;
  double strike = 0.0;
};

/// (S_T - K)^+ 1{inf over the window of S >= L}, L > K. The indicator keeps
/// paths that stay above the barrier for the whole monitoring window.
struct PartialBarrier {
  double strike = 0.0;
  double barrier = 0.0;
};

using Payoff = std::variant<DiscreteAsian, IntegralAsian, DiscreteLookback, PartialBarrier>;

/// True for payoffs of the form (h(w) - K)^+ with h homogeneous.
bool has_h(const Payoff& payoff);
double payoff_strike(const Payoff& payoff);

// ---------------------------------------------------------------------------
// Approximation descriptors g~
// ---------------------------------------------------------------------------

/// C_h (w(0) - K / C_h)^+ with C_h = E[h(unit-started window)].
struct ScaledVanilla {
  double c_h = 1.0;
  double strike = 0.0;
};

/// 1/N sum_i (w(tau - tau_i) - K_i)^+ with mean(K_i) = K; offsets are the payoff's.
struct VanillaBasket {
  std::vector<double> strikes;
};

/// 1/tau int (w(s) - K_s)^+ ds for a piecewise-constant profile over equal
/// segments of the window with mean K. Empty `strikes` means K_s = K.
struct StrikeProfileBasket {
  std::vector<double> strikes;
};

/// (w(tau) - K) 1{w(tau) >= L}: a call struck at L plus (L - K) digitals at L.
struct GapCall {
  double strike = 0.0;
  double barrier = 0.0;
};

/// g~ := g. Makes the error term identically zero; used for diagnostics.
struct ExactCopy {};

using Approximation = std::variant<ScaledVanilla, VanillaBasket, StrikeProfileBasket, GapCall, ExactCopy>;

/// Thresholds of the localization conditions:
/// inf w > m_lower => g = g~, sup w < m_upper => g = g~, |g - g~| <= sup w + slack.
struct ConditionMeta {
  double m_upper = std::numeric_limits<double>::infinity();
  double m_lower = 0.0;
  double slack = 0.0;
};

/// A validated (g, g~) pair. Immutable.
class PayoffPair {
 public:
  PayoffPair(Payoff payoff, Approximation approximation,
             std::optional<ConditionMeta> meta = std::nullopt);

  const Payoff& payoff() const noexcept { return payoff_; }
  const Approximation& approximation() const noexcept { return approximation_; }

  /// Localization thresholds; present for every pair except ScaledVanilla ones.
  const std::optional<ConditionMeta>& condition_meta() const noexcept { return meta_; }

  /// (h(w) - K)^+ paired with the scaled vanilla.
  bool is_scaled_vanilla_pair() const noexcept;
  bool is_exact_copy() const noexcept;

  /// Canonical descriptor text, 17-digit numbers.
  std::string fingerprint() const;


 private:
  Payoff payoff_;
  Approximation approximation_;
  std::optional<ConditionMeta> meta_;
};

/// Same pair with the ScaledVanilla constant replaced.
PayoffPair with_c_h(const PayoffPair& pair, double c_h);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Evaluator bound to a fixed monitoring grid: offsets are snapped to the
/// nearest grid time once, trapezoid weights and strike profiles are
/// precomputed. Evaluation takes the path values on that grid.
class PreparedPair {
 public:
  PreparedPair(const PayoffPair& pair, std::span<const double> times);

  const PayoffPair& pair() const noexcept { return pair_; }
  std::size_t grid_size() const noexcept { return n_; }
  const std::vector<std::size_t>& sample_indices() const noexcept { return sample_idx_; }
  const std::vector<double>& trapezoid_weights() const noexcept { return weights_; }
  /// Strike of each grid point for strike-profile baskets (re-centred so the
  /// trapezoid mean is exactly K).
  const std::vector<double>& grid_strikes() const noexcept { return grid_strikes_; }

  /// Localization thresholds as applied on this grid (strike-profile
  /// baskets use the re-centred grid strikes). Empty for scaled vanillas.
  std::optional<ConditionMeta> effective_meta() const;

  /// Start prices at which the error curve has kinks or jumps: terms that
  /// depend on w(0) alone. Sorted, positive.
  std::vector<double> start_price_kinks() const;

  double h(std::span<const double> values) const;
  double g(std::span<const double> values) const;
  double g_tilde(std::span<const double> values) const;

  /// Per-path summary of a unit-started path (values[0] == 1) from which
  /// g(xU) and g~(xU) follow for any start price x > 0 without revisiting
  /// the path.
  struct ScaledPath {
    double h = 0.0;
    double first = 1.0;
    double last = 1.0;
    double inf = 1.0;
    double sup = 1.0;
    std::vector<double> samples;
    std::vector<double> ratios;      // U_j / K_j, ascending
    std::vector<double> suffix_u;    // sum over ratio rank >= r of w_j U_j
    std::vector<double> suffix_k;    // sum over ratio rank >= r of w_j K_j
    std::vector<std::size_t> order;
  };

  void summarize(std::span<const double> unit_values, ScaledPath& out) const;

  struct Values {
    double g;
    double g_tilde;
  };
  Values evaluate_scaled(const ScaledPath& path, double x) const;

 private:
  double g_from_h(double hv) const;
  double clamp_h(double hv, std::span<const double> values) const;

  PayoffPair pair_;
  std::size_t n_;
  std::vector<std::size_t> sample_idx_;
  std::vector<double> weights_;
  std::vector<double> grid_strikes_;
};

/// h(w) for Asian and lookback payoffs; UnsupportedError for the barrier.
double eval_h(const Payoff& payoff, const PathWindow& window);
double eval_g(const PayoffPair& pair, const PathWindow& window);
double eval_g_tilde(const PayoffPair& pair, const PathWindow& window);

// ---------------------------------------------------------------------------
// Hypothesis checks
// ---------------------------------------------------------------------------

struct ConditionReport {
  std::size_t samples = 0;
  std::size_t lower_applicable = 0;   // inf w > M_L
  std::size_t upper_applicable = 0;   // sup w < M_U
  std::size_t discrepancies = 0;      // g != g~
  std::size_t homogeneity_checks = 0;
  double max_gap_ratio = 0.0;         // max |g - g~| / (sup w + M)
};

/// Checks the localization conditions (pairs with thresholds) or the
/// homogeneity and boundedness of h (scaled-vanilla pairs) on every sample.
/// Throws ValidationFailure naming the first violating sample and condition.
ConditionReport check_pair_conditions(const PayoffPair& pair, std::span<const PathWindow> samples);

// ---------------------------------------------------------------------------
// The h-mean C_h
// ---------------------------------------------------------------------------

struct ChEstimate {
  double value = 0.0;
  double stderr = 0.0;
};

/// Monte Carlo estimate of E[h((S_s / S_0)_{0 <= s <= tau})]. Uses the same
/// unit-path streams as the error-curve estimator, so a curve built with the
/// same seed and grid sees exactly this constant.
ChEstimate estimate_c_h(const ModelParams& model, const Payoff& payoff, double tau,
                        std::size_t n_paths, std::uint64_t seed, int window_steps = 0,
                        unsigned workers = 1);

}  // namespace longmat
