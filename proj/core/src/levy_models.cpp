#include "longmat/levy_models.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "longmat/errors.hpp"
#include "longmat/format.hpp"
#include "longmat/quadrature.hpp"
#include "longmat/special_functions.hpp"

namespace longmat {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ConfigError(std::string("model parameter ") + name + " must be finite");
}

void require_positive(double v, const char* name) {
  require_finite(v, name);
  if (!(v > 0.0)) throw ConfigError(std::string("model parameter ") + name + " must be > 0");
}

void require_time(double t, const char* op) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError(std::string(op) + ": time must be finite and > 0, got " + std::to_string(t));
  }
}

double nig_alpha_n(const NigParams& p) { return std::hypot(p.theta, p.mu); }
double nig_s(const NigParams& p) { return std::hypot(p.b, p.delta); }

// (eta - 1) / (m lambda), continuous through m = 0.
double vg_exponent_correction(const VarianceGammaParams& p) {
  const double s2 = p.sigma * p.sigma;
  const double eta = vg_eta(p);
  return p.m * p.lambda * (2.0 / p.lambda + p.theta * p.theta / s2) / (s2 * (eta + 1.0));
}

// Log of the NIG density times alpha^{-1}, and the log density itself, share
// the same Bessel evaluation. Returns the density of Z_t at z; when
// `normalize` is set the result is divided by alpha(t).
double nig_density(const NigParams& p, double t, double z, bool normalize) {
  const double an = nig_alpha_n(p);
  const double dt = p.delta * t;
  const double y = z - p.z0;
  const double x = y - p.b * t;
  const double r = std::hypot(dt, x);
  const double arg = an * r;
  const double k1s = bessel_k1_scaled(arg);
  if (!normalize) {
    // mu delta t + theta x - a_n R <= 0 by Cauchy-Schwarz.
    const double expo = p.mu * dt + p.theta * x - arg;
    return an * dt / (std::numbers::pi * r) * std::exp(expo) * k1s;
  }
  // Dividing by alpha(t) leaves exp(theta y + a_n (s t - R)) with
  // s t - R = y (2 b t - y) / (s t + R).
  const double st = nig_s(p) * t;
  const double gap = y * (2.0 * p.b * t - y) / (st + r);
  const double expo = p.theta * y + an * gap;
  return std::sqrt(t) * an * dt / (std::numbers::pi * r) * std::exp(expo) * k1s;
}

double bm_density(const BrownianParams& p, double t, double z) {
  const double var = p.sigma * p.sigma * t;
  const double d = z - p.z0 - p.mu * t;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

double vg_tail(const VarianceGammaParams& p, double t, double a) {
  const double shape = t / p.lambda;
  const double shift = a - p.z0 - p.m * t;
  auto integrand = [&](double u) {
    const double g = p.lambda * boost::math::gamma_p_inv(shape, u);
    if (!(g > 0.0)) return shift < 0.0 ? 1.0 : 0.0;
    return normal_tail((shift - p.theta * g) / (p.sigma * std::sqrt(g)));
  };
  double err = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 20, 1e-10, &err);
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::bm:
      return "bm";
    case ModelKind::nig:
      return "nig";
    case ModelKind::vg:
      return "vg";
  }
  return "unknown";
}

ModelParams::ModelParams(BrownianParams p) : params_(p) {
  require_finite(p.z0, "z0");
  require_finite(p.mu, "mu");
  require_positive(p.sigma, "sigma");
}

ModelParams::ModelParams(NigParams p) : params_(p) {
  require_finite(p.z0, "z0");
  require_finite(p.theta, "theta");
  require_finite(p.b, "b");
  require_positive(p.delta, "delta");
  // The subordinator inf{s : B_s + mu s > delta t} is a.s. finite only for mu > 0.
  require_positive(p.mu, "mu");
}

ModelParams::ModelParams(VarianceGammaParams p) : params_(p) {
  require_finite(p.z0, "z0");
  require_finite(p.theta, "theta");
  require_finite(p.m, "m");
  require_positive(p.sigma, "sigma");
  require_positive(p.lambda, "lambda");
}

ModelKind ModelParams::kind() const noexcept {
  return static_cast<ModelKind>(params_.index());
}

double ModelParams::z0() const noexcept {
  return std::visit([](const auto& p) { return p.z0; }, params_);
}

ModelParams ModelParams::with_z0(double z0) const {
  return std::visit(
      [z0](auto p) -> ModelParams {
        p.z0 = z0;
        return ModelParams(p);
      },
      params_);
}

std::string ModelParams::fingerprint() const {
  return std::visit(
      overloaded{
          [](const BrownianParams& p) {
            return "bm(z0=" + format_g17(p.z0) + ",sigma=" + format_g17(p.sigma) +
                   ",mu=" + format_g17(p.mu) + ")";
          },
          [](const NigParams& p) {
            return "nig(z0=" + format_g17(p.z0) + ",theta=" + format_g17(p.theta) +
                   ",mu=" + format_g17(p.mu) + ",delta=" + format_g17(p.delta) +
                   ",b=" + format_g17(p.b) + ")";
          },
          [](const VarianceGammaParams& p) {
            return "vg(z0=" + format_g17(p.z0) + ",sigma=" + format_g17(p.sigma) +
                   ",theta=" + format_g17(p.theta) + ",m=" + format_g17(p.m) +
                   ",lambda=" + format_g17(p.lambda) + ")";
          },
      },
      params_);
}

double vg_eta(const VarianceGammaParams& p) {
  const double s2 = p.sigma * p.sigma;
  return std::sqrt(1.0 + (p.m * p.m * p.lambda * p.lambda / s2) *
                             (2.0 / p.lambda + p.theta * p.theta / s2));
}

double nig_eligibility_ratio(const NigParams& p) {
  return 2.0 * p.b / (p.delta + nig_s(p));
}

bool theorem_eligible(const ModelParams& model) {
  return std::visit(overloaded{
                        [](const BrownianParams&) { return true; },
                        [](const NigParams& p) { return nig_eligibility_ratio(p) < 1.0; },
                        [](const VarianceGammaParams&) { return false; },
                    },
                    model.params());
}

double alpha_exponent_rate(const ModelParams& model) {
  return std::visit(
      overloaded{
          [](const BrownianParams& p) { return -p.mu * p.mu / (2.0 * p.sigma * p.sigma); },
          [](const NigParams& p) {
            return p.mu * p.delta - p.theta * p.b - nig_s(p) * nig_alpha_n(p);
          },
          [](const VarianceGammaParams& p) {
            // The printed rate uses nu for the gamma variance rate lambda.
            const double s2 = p.sigma * p.sigma;
            const double eta = vg_eta(p);
            return std::log((1.0 + eta) / (2.0 + p.lambda * p.theta * p.theta / s2)) / p.lambda +
                   (1.0 - eta) / p.lambda - p.theta * p.m / s2;
          },
      },
      model.params());
}

double alpha(const ModelParams& model, double t) {
  require_time(t, "alpha");
  return std::exp(alpha_exponent_rate(model) * t) / std::sqrt(t);
}

double alpha_monotone_threshold(const ModelParams& model) {
  return alpha_exponent_rate(model) <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

double limit_density(const ModelParams& model, double z) {
  return std::visit(
      overloaded{
          [z](const BrownianParams& p) {
            const double s2 = p.sigma * p.sigma;
            return std::exp(p.mu * (z - p.z0) / s2) / std::sqrt(2.0 * std::numbers::pi * s2);
          },
          [z](const NigParams& p) {
            const double an = nig_alpha_n(p);
            const double s = nig_s(p);
            const double c = p.delta / std::sqrt(2.0 * std::numbers::pi) *
                             std::pow(an * an / (s * s * s * s * s * s), 0.25);
            return c * std::exp((p.theta + p.b * an / s) * (z - p.z0));
          },
          [z](const VarianceGammaParams& p) {
            const double s2 = p.sigma * p.sigma;
            const double eta = vg_eta(p);
            const double c = std::sqrt((2.0 + p.lambda * p.theta * p.theta / s2) /
                                       (2.0 * std::numbers::pi * eta * (1.0 + eta) * s2));
            return c * std::exp((p.theta / s2 + vg_exponent_correction(p)) * (z - p.z0));
          },
      },
      model.params());
}

double price_limit_density(const ModelParams& model, double x) {
  if (!(x > 0.0)) throw DomainError("price_limit_density: price must be > 0");
  return limit_density(model, std::log(x)) / x;
}

double envelope_density(const ModelParams& model, double z, double t_floor) {
  if (!(t_floor > 0.0)) throw DomainError("envelope_density: t_floor must be > 0");
  return std::visit(
      overloaded{
          [z](const BrownianParams& p) {
            const double s2 = p.sigma * p.sigma;
            return std::exp(p.mu * (z - p.z0) / s2) / std::sqrt(2.0 * std::numbers::pi * s2);
          },
          [z, t_floor](const NigParams& p) {
            const double an = nig_alpha_n(p);
            const double s = nig_s(p);
            const double bessel_factor = 1.0 + 3.0 / (8.0 * an * p.delta * t_floor);
            return std::sqrt(an / p.delta) / std::sqrt(2.0 * std::numbers::pi) * bessel_factor *
                   std::exp((p.theta + an * p.b / s) * (z - p.z0));
          },
          [](const VarianceGammaParams&) -> double {
            throw UnsupportedError("envelope_density: no envelope is available for the VG model");
          },
      },
      model.params());
}

double marginal_density(const ModelParams& model, double t, double z) {
  require_time(t, "marginal_density");
  return std::visit(
      overloaded{
          [t, z](const BrownianParams& p) { return bm_density(p, t, z); },
          [t, z](const NigParams& p) { return nig_density(p, t, z, false); },
          [](const VarianceGammaParams&) -> double {
            throw UnsupportedError("marginal_density: the VG marginal density is not provided");
          },
      },
      model.params());
}

double normalized_density(const ModelParams& model, double t, double z) {
  require_time(t, "normalized_density");
  return std::visit(
      overloaded{
          [t, z](const BrownianParams& p) {
            const double s2 = p.sigma * p.sigma;
            const double y = z - p.z0;
            return std::exp(-y * y / (2.0 * s2 * t) + p.mu * y / s2) /
                   std::sqrt(2.0 * std::numbers::pi * s2);
          },
          [t, z](const NigParams& p) { return nig_density(p, t, z, true); },
          [](const VarianceGammaParams&) -> double {
            throw UnsupportedError("normalized_density: the VG marginal density is not provided");
          },
      },
      model.params());
}

double marginal_mean(const ModelParams& model, double t) {
  require_time(t, "marginal_mean");
  return std::visit(overloaded{
                        [t](const BrownianParams& p) { return p.z0 + p.mu * t; },
                        [t](const NigParams& p) {
                          return p.z0 + p.b * t + p.theta * p.delta * t / p.mu;
                        },
                        [t](const VarianceGammaParams& p) { return p.z0 + (p.m + p.theta) * t; },
                    },
                    model.params());
}

double marginal_stddev(const ModelParams& model, double t) {
  require_time(t, "marginal_stddev");
  return std::visit(overloaded{
                        [t](const BrownianParams& p) { return p.sigma * std::sqrt(t); },
                        [t](const NigParams& p) {
                          const double an = nig_alpha_n(p);
                          return std::sqrt(p.delta * t * an * an / (p.mu * p.mu * p.mu));
                        },
                        [t](const VarianceGammaParams& p) {
                          return std::sqrt((p.sigma * p.sigma + p.theta * p.theta * p.lambda) * t);
                        },
                    },
                    model.params());
}

Support effective_support(const ModelParams& model, double t) {
  const double mean = marginal_mean(model, t);
  const double sd = marginal_stddev(model, t);
  return std::visit(
      overloaded{
          [&](const BrownianParams&) { return Support{mean - 40.0 * sd, mean + 40.0 * sd}; },
          [&](const NigParams& p) {
            // Semi-heavy tails: exp((theta -+ a_n) x) beyond the peak.
            const double an = nig_alpha_n(p);
            const double loc = p.z0 + p.b * t;
            const double lo = std::min(loc, mean) - 12.0 * sd - 45.0 / (an + p.theta);
            const double hi = std::max(loc, mean) + 12.0 * sd + 45.0 / (an - p.theta);
            return Support{lo, hi};
          },
          [&](const VarianceGammaParams& p) {
            const double s2 = p.sigma * p.sigma;
            const double root = std::sqrt(p.theta * p.theta + 2.0 * s2 / p.lambda);
            const double right_rate = (-p.theta + root) / s2;
            const double left_rate = (p.theta + root) / s2;
            return Support{mean - 12.0 * sd - 45.0 / left_rate, mean + 12.0 * sd + 45.0 / right_rate};
          },
      },
      model.params());
}

std::vector<double> density_breakpoints(const ModelParams& model, double t, double lo, double hi) {
  const double mean = marginal_mean(model, t);
  const double sd = marginal_stddev(model, t);
  double center = mean;
  double width = sd;
  if (const auto* p = std::get_if<NigParams>(&model.params())) {
    center = p->z0 + p->b * t;
    width = std::min(sd, p->delta * t);
  }
  std::vector<double> pts{lo, hi};
  for (double c : {center, mean}) {
    if (c > lo && c < hi) pts.push_back(c);
    for (double w = 0.5 * width; w < (hi - lo); w *= 2.0) {
      if (c - w > lo && c - w < hi) pts.push_back(c - w);
      if (c + w > lo && c + w < hi) pts.push_back(c + w);
    }
  }
  std::sort(pts.begin(), pts.end());
  const double min_gap = 1e-6 * width;
  std::vector<double> out{lo};
  for (double x : pts) {
    if (x - out.back() > min_gap && hi - x > min_gap) out.push_back(x);
  }
  out.push_back(hi);
  return out;
}

double marginal_tail(const ModelParams& model, double t, double a) {
  require_time(t, "marginal_tail");
  return std::visit(
      overloaded{
          [&](const BrownianParams& p) {
            return normal_tail((a - p.z0 - p.mu * t) / (p.sigma * std::sqrt(t)));
          },
          [&](const NigParams& p) {
            const auto [lo, hi] = effective_support(model, t);
            if (a <= lo) return 1.0;
            if (a >= hi) return 0.0;
            auto f = [&](double z) { return nig_density(p, t, z, false); };
            const double mean = marginal_mean(model, t);
            if (a >= mean) {
              const auto pts = density_breakpoints(model, t, a, hi);
              return integrate_adaptive(f, pts, 1e-10).value;
            }
            const auto pts = density_breakpoints(model, t, lo, a);
            return 1.0 - integrate_adaptive(f, pts, 1e-10).value;
          },
          [&](const VarianceGammaParams& p) { return vg_tail(p, t, a); },
      },
      model.params());
}

double exponential_moment(const ModelParams& model, double t, double u) {
  require_time(t, "exponential_moment");
  return std::visit(
      overloaded{
          [&](const BrownianParams& p) {
            return std::exp(t * (u * p.mu + 0.5 * u * u * p.sigma * p.sigma));
          },
          [&](const NigParams& p) {
            const double inner = p.mu * p.mu - 2.0 * (u * p.theta + 0.5 * u * u);
            if (inner < 0.0) throw DomainError("exponential_moment: NIG moment is infinite");
            return std::exp(t * (u * p.b + p.delta * (p.mu - std::sqrt(inner))));
          },
          [&](const VarianceGammaParams& p) {
            const double base = 1.0 - p.lambda * (u * p.theta + 0.5 * u * u * p.sigma * p.sigma);
            if (!(base > 0.0)) throw DomainError("exponential_moment: VG moment is infinite");
            return std::exp(u * p.m * t - (t / p.lambda) * std::log(base));
          },
      },
      model.params());
}

MarginalLaw::MarginalLaw(ModelParams model, double t) : model_(std::move(model)), t_(t) {
  require_time(t, "MarginalLaw");
}

bool MarginalLaw::has_density() const noexcept { return model_.kind() != ModelKind::vg; }

double tail_crossover(const ModelParams& model, double strike, double tau) {
  require_time(tau, "tail_crossover");
  if (!(strike > 0.0)) throw DomainError("tail_crossover: strike must be > 0");
  return std::visit(
      overloaded{
          [&](const BrownianParams& p) {
            return std::abs(p.mu * tau - std::log(strike)) + p.sigma * std::sqrt(tau);
          },
          [&](const NigParams& p) {
            const double sd = marginal_stddev(model, tau);
            return std::max({1.0 / nig_alpha_n(p), sd, 1e-3}) + std::abs(std::log(strike));
          },
          [](const VarianceGammaParams&) -> double {
            throw UnsupportedError("tail_crossover: no tail order is available for the VG model");
          },
      },
      model.params());
}

double tail_order(const ModelParams& model, TailDirection direction, double z, double strike,
                  double tau) {
  require_time(tau, "tail_order");
  if (!(strike > 0.0)) throw DomainError("tail_order: strike must be > 0");
  if (direction == TailDirection::lower && !(z > 0.0)) {
    throw DomainError("tail_order: the lower tail order needs z > 0");
  }
  if (direction == TailDirection::upper && !(z < 0.0)) {
    throw DomainError("tail_order: the upper tail order needs z < 0");
  }
  return std::visit(
      overloaded{
          [&](const BrownianParams& p) {
            // distance of log K - z from the mean mu tau of Z_tau^0
            const double d = p.mu * tau - std::log(strike);
            const double shifted = direction == TailDirection::lower ? z + d : -z - d;
            return std::exp(-shifted * shifted / (2.0 * p.sigma * p.sigma * tau)) / std::abs(z);
          },
          [&](const NigParams& p) {
            const double az = std::abs(z);
            return std::pow(az, -1.5) * std::exp(-p.theta * z - nig_alpha_n(p) * az);
          },
          [](const VarianceGammaParams&) -> double {
            throw UnsupportedError("tail_order: no tail order is available for the VG model");
          },
      },
      model.params());
}

double reflection_constant(const ModelParams& model, double tau, int grid_points) {
  require_time(tau, "reflection_constant");
  if (grid_points < 1) throw DomainError("reflection_constant: grid_points must be >= 1");
  const ModelParams origin = model.with_z0(0.0);
  double d = 1.0;
  for (int k = 1; k <= grid_points; ++k) {
    const double u = tau * k / grid_points;
    const double up = marginal_tail(origin, u, 0.0);
    d = std::min({d, up, 1.0 - up});
  }
  return d;
}

AsymptoticProfile make_profile(const ModelParams& model, double strike, double tau) {
  AsymptoticProfile profile;
  profile.alpha = [model](double t) { return alpha(model, t); };
  profile.limit_density = [model](double z) { return limit_density(model, z); };
  profile.monotone_threshold = alpha_monotone_threshold(model);
  if (model.kind() != ModelKind::vg) {
    profile.envelope = [model](double z) { return envelope_density(model, z); };
    profile.tail_upper = [model, strike, tau](double z) {
      return tail_order(model, TailDirection::upper, z, strike, tau);
    };
    profile.tail_lower = [model, strike, tau](double z) {
      return tail_order(model, TailDirection::lower, z, strike, tau);
    };
  }
  return profile;
}

}  // namespace longmat
