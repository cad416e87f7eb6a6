#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace longmat {

// Log-price models Z_t = log S_t. All rates are per year.

/// Z_t = z0 + sigma W_t + mu t
struct BrownianParams {
  double z0 = 0.0;
  double sigma = 0.0;
  double mu = 0.0;
};

/// Z_t = z0 + W_{IG(t)} + theta IG(t) + b t, IG(t) = inf{s : B_s + mu s > delta t}
struct NigParams {
  double z0 = 0.0;
  double theta = 0.0;
  double mu = 0.0;
  double delta = 0.0;
  double b = 0.0;
};

/// Z_t = z0 + sigma W_{gamma(t)} + theta gamma(t) + m t, gamma with variance rate lambda
struct VarianceGammaParams {
  double z0 = 0.0;
  double sigma = 0.0;
  double theta = 0.0;
  double m = 0.0;
  double lambda = 0.0;
};

enum class ModelKind { bm, nig, vg };

std::string_view to_string(ModelKind kind);

/// A validated parameter set for one of the three models. Immutable.
class ModelParams {
 public:
  using Variant = std::variant<BrownianParams, NigParams, VarianceGammaParams>;

  ModelParams(BrownianParams p);            // NOLINT(google-explicit-constructor)
  ModelParams(NigParams p);                 // NOLINT(google-explicit-constructor)
  ModelParams(VarianceGammaParams p);       // NOLINT(google-explicit-constructor)

  ModelKind kind() const noexcept;
  const Variant& params() const noexcept { return params_; }
  double z0() const noexcept;

  /// Same model restarted at log-price z0.
  ModelParams with_z0(double z0) const;

  /// Canonical text identifying the model and every parameter to 17 digits.
  std::string fingerprint() const;

 private:
  Variant params_;
};

/// VG eta := sqrt(1 + (m^2 lambda^2 / sigma^2)(2/lambda + theta^2/sigma^2)); always >= 1.
double vg_eta(const VarianceGammaParams& p);

/// 2b / (delta + sqrt(b^2 + delta^2)); the NIG pricing theorems need this < 1.
double nig_eligibility_ratio(const NigParams& p);

/// True when the approximation theorems are proven for the model:
/// BM always, NIG when the eligibility ratio is below one, VG never.
bool theorem_eligible(const ModelParams& model);

// ---------------------------------------------------------------------------
// Decay rate and limiting densities
// ---------------------------------------------------------------------------

/// Decay rate alpha(t) such that the law of Z_t divided by alpha(t) converges.
/// Not a probability: exceeds one for small t.
double alpha(const ModelParams& model, double t);

/// kappa in alpha(t) = t^{-1/2} exp(kappa t).
double alpha_exponent_rate(const ModelParams& model);

/// Time beyond which alpha is nonincreasing (0 for every supported parameter
/// set with kappa <= 0; +inf when kappa > 0).
double alpha_monotone_threshold(const ModelParams& model);

/// Lebesgue density of the limit measure in log-price space.
double limit_density(const ModelParams& model, double z);

/// Density of the limit measure in price space: limit_density(log x) / x.
double price_limit_density(const ModelParams& model, double x);

inline constexpr double kLargeTime = std::numeric_limits<double>::infinity();

/// Upper bound for marginal_density(t, z) / alpha(t), uniform over t >= t_floor.
/// BM does not depend on t_floor. For NIG the default (t_floor = inf) is the
/// large-time envelope; finite t_floor adds the Bessel remainder factor
/// (1 + 3 / (8 a delta t_floor)). VG has no envelope.
double envelope_density(const ModelParams& model, double z, double t_floor = kLargeTime);

// ---------------------------------------------------------------------------
// Marginal laws
// ---------------------------------------------------------------------------

/// Density of Z_t at z (BM closed form, NIG Bessel form). VG is unsupported.
double marginal_density(const ModelParams& model, double t, double z);

/// marginal_density(t, z) / alpha(t), evaluated without intermediate overflow.
double normalized_density(const ModelParams& model, double t, double z);

double marginal_mean(const ModelParams& model, double t);
double marginal_stddev(const ModelParams& model, double t);

/// P(Z_t > a). BM closed form, NIG density quadrature, VG gamma-mixture quadrature.
double marginal_tail(const ModelParams& model, double t, double a);

/// E[exp(u (Z_t - z0))]; DomainError when the moment is infinite.
double exponential_moment(const ModelParams& model, double t, double u = 1.0);

/// Interval [lo, hi] outside which the density of Z_t is negligible
/// (mass outside well below 1e-12).
struct Support {
  double lo;
  double hi;
};
Support effective_support(const ModelParams& model, double t);

/// Breakpoints for piecewise integration of the density of Z_t over [lo, hi]:
/// geometric spacing around the peak so narrow peaks are always bracketed.
std::vector<double> density_breakpoints(const ModelParams& model, double t, double lo, double hi);

/// Law of Z_t at one time. Thin value wrapper over the free functions.
class MarginalLaw {
 public:
  MarginalLaw(ModelParams model, double t);

  const ModelParams& model() const noexcept { return model_; }
  double t() const noexcept { return t_; }
  bool has_density() const noexcept;
  double density(double z) const { return marginal_density(model_, t_, z); }
  double tail(double a) const { return marginal_tail(model_, t_, a); }

 private:
  ModelParams model_;
  double t_;
};

// ---------------------------------------------------------------------------
// Tail orders and the reflection constant
// ---------------------------------------------------------------------------

enum class TailDirection {
  upper,  // P(Z_tau^0 > log K - z), z -> -inf
  lower,  // P(Z_tau^0 < log K - z), z -> +inf
};

/// Asymptotic order of the window tail probability, as an unnormalized
/// expression; only meaningful beyond tail_crossover. Used for truncation.
double tail_order(const ModelParams& model, TailDirection direction, double z, double strike,
                  double tau);

/// |z| beyond which tail_order is evaluated.
double tail_crossover(const ModelParams& model, double strike, double tau);

/// D = min over u in {tau/n, ..., tau} of min(P(Z_u^0 > 0), P(Z_u^0 < 0)),
/// with Z^0 the process started at zero.
double reflection_constant(const ModelParams& model, double tau, int grid_points = 20);

// ---------------------------------------------------------------------------
// Profile
// ---------------------------------------------------------------------------

struct AsymptoticProfile {
  std::function<double(double)> alpha;
  std::function<double(double)> limit_density;
  std::optional<std::function<double(double)>> envelope;  // absent for VG
  std::optional<std::function<double(double)>> tail_upper;
  std::optional<std::function<double(double)>> tail_lower;
  double monotone_threshold = 0.0;
};

/// Bundles the asymptotic descriptors for one model. Tail functions are bound
/// to the given strike and window length.
AsymptoticProfile make_profile(const ModelParams& model, double strike = 1.0, double tau = 1.0);

}  // namespace longmat
