#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "longmat/levy_models.hpp"
#include "longmat/parallel.hpp"
#include "longmat/payoffs.hpp"
#include "longmat/price_estimate.hpp"
#include "longmat/rng.hpp"

namespace longmat {

struct SimPlan {
  ModelParams model;
  double maturity = 0.0;   // T
  double tau = 0.0;        // window length
  int window_steps = 0;    // 0 selects default_window_steps(tau)
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::size_t chunk_paths = kDefaultChunk;
  unsigned workers = 1;
};

/// Validates the plan and resolves the default window resolution.
SimPlan resolve(const SimPlan& plan);

/// Z_{t+dt} - Z_t, exact in law.
double sample_increment(const ModelParams& model, double dt, RandomStream& rng);

/// One exact draw of Z_t.
double sample_marginal(const ModelParams& model, double t, RandomStream& rng);

/// Log-price path on `times` (times[0] == 0) started at start_log; exact in
/// law at every grid time. `out` must have times.size() entries.
void sample_window_log(const ModelParams& model, double start_log, std::span<const double> times,
                       RandomStream& rng, std::span<double> out);

/// Price-space window e^Z on uniform_grid(tau, steps).
PathWindow sample_window_path(const ModelParams& model, double start_log, double tau, int steps,
                              RandomStream& rng);

/// A_MC = E[g] for a raw payoff. Each path jumps to T - tau with the
/// `marginal` stream of its index, then walks the window with the `window`
/// stream, so window randomness is shared across maturities.
PriceEstimate mc_price(const SimPlan& plan, const Payoff& payoff);

/// E[g], E[g~] and E[g - g~] on the same paths.
struct PairEstimate {
  PriceEstimate g;
  PriceEstimate g_tilde;
  PriceEstimate difference;
};
PairEstimate mc_price(const SimPlan& plan, const PayoffPair& pair);

// ---------------------------------------------------------------------------
// Reflection inequalities
// ---------------------------------------------------------------------------

struct ReflectionRow {
  double a = 0.0;
  double p_terminal_upper = 0.0;  // P(Z_tau > a)
  double p_sup = 0.0;             // P(sup Z > a)
  double p_terminal_lower = 0.0;  // P(Z_tau < -a)
  double p_inf = 0.0;             // P(inf Z < -a)
  double gap_upper = 0.0;         // P(Z_tau > a) - D P(sup > a)
  double gap_upper_stderr = 0.0;
  double gap_lower = 0.0;
  double gap_lower_stderr = 0.0;
  bool upper_holds = false;       // gap >= -3 stderr
  bool lower_holds = false;
};

struct ReflectionReport {
  double d_hat = 0.0;
  double u_floor = 0.0;  // smallest u of the D grid
  int d_grid_points = 0;
  std::size_t n_paths = 0;
  int steps = 0;
  bool bridge_corrected = false;  // BM extrema use the Brownian-bridge crossing law
  std::vector<ReflectionRow> rows;
  bool all_hold() const noexcept;
};

/// Empirical check of P(Z_tau > a) >= D P(sup Z > a) and the mirrored lower
/// tail for the process started at zero. BM extrema are estimated without
/// monitoring bias through the bridge crossing probability between grid
/// points; NIG extrema are read off the grid.
ReflectionReport reflection_check(const ModelParams& model, double tau, std::span<const double> a_grid,
                                  std::size_t n_paths, std::uint64_t seed, int steps = 252,
                                  unsigned workers = 1, int d_grid_points = 20);

}  // namespace longmat
