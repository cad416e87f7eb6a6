#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "longmat/levy_models.hpp"
#include "longmat/payoffs.hpp"

namespace longmat {

/// Throws EligibilityError unless the approximation theorems cover the model
/// or experimental use is allowed.
void require_eligible(const ModelParams& model, bool allow_experimental);

/// Identifies the (model, pair, tau) an error constant belongs to.
std::string error_constant_fingerprint(const ModelParams& model, const PayoffPair& pair, double tau);

struct EpsilonOptions {
  int window_steps = 0;  // 0 selects default_window_steps(tau)
  bool allow_experimental = false;
  unsigned workers = 1;
};

struct EpsilonNode {
  double z = 0.0;
  double value = 0.0;
  double stderr = 0.0;
};

struct EpsilonCurve {
  std::vector<EpsilonNode> nodes;  // sorted by z
  double tau = 0.0;
  std::string pair_id;
  std::string model_id;
  std::uint64_t seed = 0;
  std::size_t n_paths = 0;
  int window_steps = 0;
};

/// eps^(z) = E[g(x U) - g~(x U)], x = e^z, U the unit-started price process.
EpsilonNode epsilon_hat(const ModelParams& model, const PayoffPair& pair, double tau, double z,
                        std::size_t n_paths, std::uint64_t seed, const EpsilonOptions& opts = {});

/// eps^ on several start points with common random numbers: every node sees
/// the same unit paths.
EpsilonCurve epsilon_curve(const ModelParams& model, const PayoffPair& pair, double tau,
                           std::span<const double> zs, std::size_t n_paths, std::uint64_t seed,
                           const EpsilonOptions& opts = {});

// ---------------------------------------------------------------------------
// Truncation
// ---------------------------------------------------------------------------

struct TruncationBounds {
  double z_lo = 0.0;
  double z_hi = 0.0;
  double d_hat = 0.0;
  bool experimental = false;  // VG: bounds from empirical tails
};

struct TruncationOptions {
  std::uint64_t seed = 0;           // VG empirical tails only
  std::size_t tail_samples = 100000;
};

/// Bounds outside of which (K / D) * tail * envelope < tol. The tail order is
/// applied to the distance z - log K from the relevant threshold (M_L above,
/// M_U below). VG uses exponential tails fitted to exact draws of Z_tau and
/// the limit density in place of an envelope.
TruncationBounds truncation_bounds(const ModelParams& model, const PayoffPair& pair, double tau, double tol,
                                   const TruncationOptions& opts = {});

// ---------------------------------------------------------------------------
// Error constant
// ---------------------------------------------------------------------------

struct QuadratureConfig {
  int nodes_per_panel = 16;
  int max_evaluations = 512;
  double truncation_tol = 1e-10;
  std::size_t n_paths = 100000;
  int window_steps = 0;
  bool allow_experimental = false;
  unsigned workers = 1;
  std::optional<double> z_lo;  // overrides the computed bounds
  std::optional<double> z_hi;
};

struct ErrorConstant {
  double value = 0.0;
  double stderr = 0.0;              // from per-path weighted sums, covariance included
  double stderr_independent = 0.0;  // node errors combined as if independent
  double z_lo = 0.0;
  double z_hi = 0.0;
  int n_nodes = 0;
  std::string rule;
  std::string fingerprint;
  std::uint64_t seed = 0;
  std::size_t n_paths = 0;
  bool experimental = false;
  EpsilonCurve curve;

  bool significant(double k = 1.0) const noexcept;
};

/// Panel edges for the error-constant quadrature: kinks of eps^ are panel
/// edges and no panel is wider than ln(10) / |d log limit_density / dz|.
std::vector<double> error_constant_panels(const ModelParams& model, double z_lo, double z_hi,
                                          std::span<const double> kinks, int panels);

/// C_err = int eps^(z) limit_density(z) dz by composite Gauss-Legendre on the
/// truncated range, eps^ from common random numbers. Throws TruncationError
/// when eps^ is not negligible at the end nodes.
ErrorConstant error_constant(const ModelParams& model, const PayoffPair& pair, double tau,
                             const QuadratureConfig& quad, std::uint64_t seed);

}  // namespace longmat
