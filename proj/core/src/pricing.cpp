#include "longmat/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "longmat/errors.hpp"
#include "longmat/format.hpp"
#include "longmat/mc_engine.hpp"
#include "longmat/parallel.hpp"
#include "longmat/quadrature.hpp"
#include "longmat/rng.hpp"
#include "longmat/special_functions.hpp"

namespace longmat {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

PriceMethod marginal_method(const ModelParams& model) {
  switch (model.kind()) {
    case ModelKind::bm: return PriceMethod::closed_form;
    case ModelKind::nig: return PriceMethod::density_quadrature;
    case ModelKind::vg: return PriceMethod::monte_carlo;
  }
  return PriceMethod::monte_carlo;
}

void require_strike(double strike) {
  if (!(strike >= 0.0) || !std::isfinite(strike)) throw DomainError("vanilla_price: strike must be finite and >= 0");
}

PriceEstimate vanilla_mc(const ModelParams& model, double t, double strike, const PricingOptions& opts) {
  auto chunks = run_chunks(opts.mc_paths, kDefaultChunk, std::max(1u, opts.workers),
                           [&](std::size_t, std::size_t begin, std::size_t end) {
    RunningStats acc;
    for (std::size_t p = begin; p < end; ++p) {
      RandomStream rng(opts.seed, p, StreamDomain::vanilla);
      acc.add(std::max(std::exp(sample_marginal(model, t, rng)) - strike, 0.0));
    }
    return acc;
  });
  RunningStats total;
  for (const auto& c : chunks) total.merge(c);
  PriceEstimate e;
  e.value = total.mean;
  e.stderr = total.stderr();
  e.method = PriceMethod::monte_carlo;
  e.maturity = t;
  e.seed = opts.seed;
  e.n_paths = total.n;
  return e;
}

void add_scaled(PriceEstimate& acc, const PriceEstimate& term, double weight) {
  acc.value += weight * term.value;
  acc.stderr += weight * term.stderr;
  if (term.seed) acc.seed = term.seed;
  acc.n_paths = std::max(acc.n_paths, term.n_paths);
}

}  // namespace

PriceEstimate vanilla_price_quadrature(const ModelParams& model, double t, double strike, double rel_tol) {
  require_strike(strike);
  if (model.kind() == ModelKind::vg) throw UnsupportedError("vanilla_price_quadrature: no VG density");
  if (!(t > 0.0)) throw DomainError("vanilla_price: t must be > 0");
  (void)exponential_moment(model, t, 1.0);  // throws when E[S_t] is infinite

  const auto support = effective_support(model, t);
  double hi = support.hi;
  if (const auto* p = std::get_if<NigParams>(&model.params())) {
    // e^z f(z) decays like exp(-(a_n - theta - 1) z).
    const double rate = std::hypot(p->theta, p->mu) - p->theta - 1.0;
    if (!(rate > 0.0)) throw DomainError("vanilla_price: NIG first exponential moment is infinite");
    hi = std::max(hi, marginal_mean(model, t) + 12.0 * marginal_stddev(model, t) + 45.0 / rate);
  } else {
    hi += marginal_stddev(model, t) * marginal_stddev(model, t);
  }
  const double lo = strike > 0.0 ? std::max(std::log(strike), support.lo) : support.lo;
  PriceEstimate e;
  e.method = PriceMethod::density_quadrature;
  e.maturity = t;
  if (!(hi > lo)) return e;
  auto pts = density_breakpoints(model, t, lo, hi);
  const double tilt = marginal_mean(model, t) + marginal_stddev(model, t) * marginal_stddev(model, t);
  if (tilt > lo && tilt < hi) {
    pts.push_back(tilt);
    std::sort(pts.begin(), pts.end());
  }
  auto f = [&](double z) { return (std::exp(z) - strike) * marginal_density(model, t, z); };
  e.value = integrate_adaptive(f, pts, rel_tol).value;
  return e;
}

PriceEstimate vanilla_price(const ModelParams& model, double t, double strike, const PricingOptions& opts) {
  require_strike(strike);
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("vanilla_price: t must be finite and > 0");
  PriceEstimate e;
  e.maturity = t;
  if (strike == 0.0) {
    e.method = PriceMethod::closed_form;
    e.value = std::exp(model.z0()) * exponential_moment(model, t, 1.0);
    return e;
  }
  switch (model.kind()) {
    case ModelKind::bm: {
      const auto& p = std::get<BrownianParams>(model.params());
      const double m = p.z0 + p.mu * t;
      const double v = p.sigma * p.sigma * t;
      const double sd = std::sqrt(v);
      const double lk = std::log(strike);
      e.method = PriceMethod::closed_form;
      e.value = std::exp(m + 0.5 * v) * normal_tail((lk - m - v) / sd) - strike * normal_tail((lk - m) / sd);
      e.value = std::max(e.value, 0.0);
      return e;
    }
    case ModelKind::nig: return vanilla_price_quadrature(model, t, strike, opts.rel_tol);
    case ModelKind::vg: return vanilla_mc(model, t, strike, opts);
  }
  return e;
}

double digital_probability(const ModelParams& model, double t, double level) {
  if (!(level > 0.0)) throw DomainError("digital_probability: level must be > 0");
  return marginal_tail(model, t, std::log(level));
}

PriceEstimate approx_price_tilde(const ModelParams& model, const PayoffPair& pair, double maturity, double tau,
                                 const PricingOptions& opts) {
  if (!(tau > 0.0) || !(maturity > tau) || !std::isfinite(maturity)) {
    throw DomainError("approx_price_tilde: need 0 < tau < T");
  }
  const int steps = opts.window_steps > 0 ? opts.window_steps : default_window_steps(tau);
  const auto times = uniform_grid(tau, steps);
  const PreparedPair prepared(pair, times);
  const double start = maturity - tau;

  PriceEstimate out;
  out.maturity = maturity;
  out.method = marginal_method(model);

  auto path_mc = [&] {
    SimPlan plan{model, maturity, tau, steps, opts.mc_paths, opts.seed, kDefaultChunk, std::max(1u, opts.workers)};
    return mc_price(plan, pair).g_tilde;
  };

  std::visit(
      overloaded{
          [&](const ScaledVanilla& a) { add_scaled(out, vanilla_price(model, start, a.strike / a.c_h, opts), a.c_h); },
          [&](const VanillaBasket& a) {
            const auto& idx = prepared.sample_indices();
            const double w = 1.0 / static_cast<double>(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
              add_scaled(out, vanilla_price(model, start + times[idx[i]], a.strikes[i], opts), w);
            }
          },
          [&](const StrikeProfileBasket&) {
            if (model.kind() == ModelKind::vg) {
              out = path_mc();
              return;
            }
            const auto& w = prepared.trapezoid_weights();
            const auto& ks = prepared.grid_strikes();
            for (std::size_t j = 0; j < times.size(); ++j) {
              add_scaled(out, vanilla_price(model, start + times[j], ks[j], opts), w[j]);
            }
          },
          [&](const GapCall& a) {
            add_scaled(out, vanilla_price(model, maturity, a.barrier, opts), 1.0);
            out.value += (a.barrier - a.strike) * digital_probability(model, maturity, a.barrier);
          },
          [&](const ExactCopy&) { out = path_mc(); },
      },
      pair.approximation());
  out.maturity = maturity;
  return out;
}

PriceEstimate asymptotic_price(const ModelParams& model, const PayoffPair& pair, double maturity, double tau,
                               const ErrorConstant& c_err, const PricingOptions& opts) {
  if (c_err.fingerprint != error_constant_fingerprint(model, pair, tau)) {
    throw ConsistencyError("error constant was computed for a different model, payoff pair or window");
  }
  const PriceEstimate a = approx_price_tilde(model, pair, maturity, tau, opts);
  const double alpha_value = alpha(model, maturity - tau);
  PriceEstimate e;
  e.method = PriceMethod::asymptotic;
  e.maturity = maturity;
  e.components = PriceComponents{a.value, c_err.value, alpha_value, a.stderr};
  e.value = a.value + c_err.value * alpha_value;
  e.stderr = c_err.stderr * alpha_value + a.stderr;
  e.seed = c_err.seed;
  e.n_paths = c_err.n_paths;
  return e;
}

StudyTable ratio_convergence_study(const ModelParams& model, const PayoffPair& pair, double tau,
                                   const std::vector<double>& maturities, std::size_t n_paths, std::uint64_t seed,
                                   const StudyOptions& opts, const std::optional<ErrorConstant>& c_err) {
  if (maturities.empty()) throw ConfigError("study: at least one maturity is required");
  for (std::size_t i = 0; i < maturities.size(); ++i) {
    if (!(maturities[i] > tau) || (i > 0 && !(maturities[i] > maturities[i - 1]))) {
      throw ConfigError("study: maturities must be increasing and > tau");
    }
  }
  if (opts.resolutions.empty()) throw ConfigError("study: at least one resolution is required");
  const unsigned workers = std::max(1u, opts.workers);
  const int base_steps = opts.window_steps > 0 ? opts.window_steps : default_window_steps(tau);

  StudyTable table;
  if (c_err) {
    if (c_err->fingerprint != error_constant_fingerprint(model, pair, tau)) {
      throw ConsistencyError("error constant was computed for a different model, payoff pair or window");
    }
    table.error_constant = *c_err;
  } else {
    QuadratureConfig quad = opts.quadrature;
    quad.window_steps = base_steps;
    quad.workers = workers;
    table.error_constant = error_constant(model, pair, tau, quad, seed);
  }

  for (int res : opts.resolutions) {
    if (res < 1) throw ConfigError("study: resolutions must be >= 1");
    const int steps = base_steps * res;
    PricingOptions pricing = opts.pricing;
    pricing.window_steps = steps;
    pricing.workers = workers;
    for (double t : maturities) {
      const PriceEstimate a_tilde = approx_price_tilde(model, pair, t, tau, pricing);
      SimPlan plan{model, t, tau, steps, n_paths, seed, kDefaultChunk, workers};
      const PairEstimate mc = mc_price(plan, pair);
      StudyRow row;
      row.maturity = t;
      row.window_steps = steps;
      row.a_tilde = a_tilde.value;
      row.a_tilde_stderr = a_tilde.stderr;
      row.a_mc = a_tilde.value + mc.difference.value;
      row.a_mc_stderr = std::hypot(mc.difference.stderr, a_tilde.stderr);
      row.a_mc_plain = mc.g.value;
      row.a_mc_plain_stderr = mc.g.stderr;
      row.alpha_value = alpha(model, t - tau);
      row.ratio = mc.difference.value / row.alpha_value;
      row.ratio_stderr = mc.difference.stderr / row.alpha_value;
      table.rows.push_back(row);
    }
  }

  if (opts.target_ratio_stderr) {
    const double target = *opts.target_ratio_stderr;
    double worst = 0.0;
    for (const auto& r : table.rows) worst = std::max(worst, r.ratio_stderr);
    if (worst > target) {
      const double scale = (worst / target) * (worst / target);
      const auto required = static_cast<std::size_t>(std::ceil(static_cast<double>(n_paths) * scale));
      throw BudgetError("ratio stderr " + format_g17(worst) + " exceeds the target " + format_g17(target) +
                            "; about " + std::to_string(required) + " paths are required",
                        required);
    }
  }
  return table;
}

}  // namespace longmat
