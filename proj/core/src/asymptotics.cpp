#include "longmat/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "longmat/errors.hpp"
#include "longmat/format.hpp"
#include "longmat/mc_engine.hpp"
#include "longmat/parallel.hpp"
#include "longmat/quadrature.hpp"
#include "longmat/rng.hpp"

namespace longmat {

namespace {

struct CrnResult {
  std::vector<RunningStats> nodes;
  RunningStats weighted;
};

// Simulates n unit-started windows once and evaluates g - g~ at every start
// point on each of them. `weights` may be empty; otherwise the weighted sum
// over nodes is accumulated per path.
CrnResult crn_evaluate(const ModelParams& model, const PayoffPair& pair, double tau,
                       std::span<const double> zs, std::span<const double> weights, std::size_t n_paths,
                       std::uint64_t seed, int steps, unsigned workers) {
  const auto times = uniform_grid(tau, steps);
  const PreparedPair prepared(pair, times);
  std::vector<double> xs(zs.size());
  for (std::size_t k = 0; k < zs.size(); ++k) xs[k] = std::exp(zs[k]);

  auto chunks = run_chunks(n_paths, kDefaultChunk, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    CrnResult acc{std::vector<RunningStats>(zs.size()), {}};
    std::vector<double> unit(times.size());
    PreparedPair::ScaledPath path;
    for (std::size_t p = begin; p < end; ++p) {
      RandomStream rng(seed, p, StreamDomain::window);
      sample_window_log(model, 0.0, times, rng, unit);
      for (double& v : unit) v = std::exp(v);
      prepared.summarize(unit, path);
      double y = 0.0;
      for (std::size_t k = 0; k < xs.size(); ++k) {
        const auto v = prepared.evaluate_scaled(path, xs[k]);
        const double d = v.g - v.g_tilde;
        acc.nodes[k].add(d);
        if (!weights.empty()) y += weights[k] * d;
      }
      acc.weighted.add(y);
    }
    return acc;
  });

  CrnResult total{std::vector<RunningStats>(zs.size()), {}};
  for (const auto& c : chunks) {
    for (std::size_t k = 0; k < zs.size(); ++k) total.nodes[k].merge(c.nodes[k]);
    total.weighted.merge(c.weighted);
  }
  return total;
}

int resolve_steps(int steps, double tau) { return steps > 0 ? steps : default_window_steps(tau); }

// Smallest point beyond `start` (moving in direction `dir`) where bound < tol,
// assuming the bound decays monotonically there.
double decay_point(const std::function<double(double)>& bound, double start, double dir, double tol) {
  if (bound(start) < tol) return start;
  double step = 0.25;
  double inside = start;
  double outside = start + dir * step;
  int guard = 0;
  while (!(bound(outside) < tol)) {
    inside = outside;
    step *= 2.0;
    outside = start + dir * step;
    if (++guard > 60) throw NumericError("truncation_bounds: integrand bound does not decay");
  }
  for (int it = 0; it < 200 && std::abs(outside - inside) > 1e-10 * (1.0 + std::abs(outside)); ++it) {
    const double mid = 0.5 * (inside + outside);
    if (bound(mid) < tol) {
      outside = mid;
    } else {
      inside = mid;
    }
  }
  return outside;
}

struct SideStrikes {
  double above;  // threshold governing z -> +inf (M_L)
  double below;  // threshold governing z -> -inf (M_U)
};

SideStrikes side_strikes(const PayoffPair& pair) {
  const double k = payoff_strike(pair.payoff());
  SideStrikes s{k, k};
  if (const auto& meta = pair.condition_meta()) {
    if (meta->m_lower > 0.0) s.above = meta->m_lower;
    if (std::isfinite(meta->m_upper)) s.below = meta->m_upper;
  }
  return s;
}

TruncationBounds vg_bounds(const ModelParams& model, const PayoffPair& pair, double tau, double tol,
                           const TruncationOptions& opts, double d) {
  const std::size_t n = std::max<std::size_t>(opts.tail_samples, 10000);
  const ModelParams zero = model.with_z0(0.0);
  std::vector<double> draws(n);
  for (std::size_t p = 0; p < n; ++p) {
    RandomStream rng(opts.seed, p, StreamDomain::tails);
    draws[p] = sample_marginal(zero, tau, rng);
  }
  std::sort(draws.begin(), draws.end());
  const double p0 = 1e-3;
  const auto k = static_cast<std::size_t>(p0 * static_cast<double>(n));
  const double q_lo = draws[k];
  const double q_hi = draws[n - 1 - k];
  double e_lo = 0.0;
  double e_hi = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    e_lo += q_lo - draws[i];
    e_hi += draws[n - 1 - i] - q_hi;
  }
  e_lo = std::max(e_lo / static_cast<double>(k), 1e-12);
  e_hi = std::max(e_hi / static_cast<double>(k), 1e-12);

  const auto strikes = side_strikes(pair);
  auto tail_below = [&](double level) {  // P(Z_tau < level)
    return level >= q_lo ? 1.0 : p0 * std::exp(-(q_lo - level) / e_lo);
  };
  auto tail_above = [&](double level) {  // P(Z_tau > level)
    return level <= q_hi ? 1.0 : p0 * std::exp(-(level - q_hi) / e_hi);
  };
  auto upper = [&](double z) {
    return strikes.above / d * tail_below(std::log(strikes.above) - z) * limit_density(model, z);
  };
  auto lower = [&](double z) {
    return strikes.below / d * tail_above(std::log(strikes.below) - z) * limit_density(model, z);
  };
  TruncationBounds b;
  b.d_hat = d;
  b.experimental = true;
  b.z_hi = decay_point(upper, std::log(strikes.above) - q_lo, 1.0, tol);
  b.z_lo = decay_point(lower, std::log(strikes.below) - q_hi, -1.0, tol);
  return b;
}

}  // namespace

void require_eligible(const ModelParams& model, bool allow_experimental) {
  if (allow_experimental || theorem_eligible(model)) return;
  if (model.kind() == ModelKind::vg) {
    throw EligibilityError(
        "VG asymptotic pricing is experimental: set numerics.allow_experimental or pass --allow-experimental");
  }
  throw EligibilityError("NIG parameters fail 2b / (delta + sqrt(b^2 + delta^2)) < 1 (ratio " +
                         format_g17(nig_eligibility_ratio(std::get<NigParams>(model.params()))) +
                         "); set allow_experimental to proceed anyway");
}

std::string error_constant_fingerprint(const ModelParams& model, const PayoffPair& pair, double tau) {
  return model.fingerprint() + "|" + pair.fingerprint() + "|tau=" + format_g17(tau);
}

EpsilonCurve epsilon_curve(const ModelParams& model, const PayoffPair& pair, double tau,
                           std::span<const double> zs, std::size_t n_paths, std::uint64_t seed,
                           const EpsilonOptions& opts) {
  require_eligible(model, opts.allow_experimental);
  if (n_paths < 10000) throw ConfigError("epsilon_hat: n_paths must be >= 10000");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("epsilon_hat: tau must be > 0");
  for (double z : zs) {
    if (!std::isfinite(z)) throw DomainError("epsilon_hat: start log-prices must be finite");
  }
  if (!std::is_sorted(zs.begin(), zs.end())) throw DomainError("epsilon_curve: nodes must be sorted");
  const int steps = resolve_steps(opts.window_steps, tau);
  const auto res = crn_evaluate(model, pair, tau, zs, {}, n_paths, seed, steps, std::max(1u, opts.workers));
  EpsilonCurve curve;
  curve.tau = tau;
  curve.pair_id = pair.fingerprint();
  curve.model_id = model.fingerprint();
  curve.seed = seed;
  curve.n_paths = n_paths;
  curve.window_steps = steps;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    curve.nodes.push_back({zs[k], res.nodes[k].mean, res.nodes[k].stderr()});
  }
  return curve;
}

EpsilonNode epsilon_hat(const ModelParams& model, const PayoffPair& pair, double tau, double z,
                        std::size_t n_paths, std::uint64_t seed, const EpsilonOptions& opts) {
  const double zs[] = {z};
  return epsilon_curve(model, pair, tau, zs, n_paths, seed, opts).nodes.front();
}

TruncationBounds truncation_bounds(const ModelParams& model, const PayoffPair& pair, double tau, double tol,
                                   const TruncationOptions& opts) {
  if (!(tol > 0.0)) throw DomainError("truncation_bounds: tol must be > 0");
  if (!(tau > 0.0)) throw DomainError("truncation_bounds: tau must be > 0");
  const double d = reflection_constant(model, tau);
  if (!(d > 0.0)) throw UnsupportedError("truncation_bounds: reflection constant is not positive");
  if (model.kind() == ModelKind::vg) return vg_bounds(model, pair, tau, tol, opts, d);

  const auto strikes = side_strikes(pair);
  const double c0 = tail_crossover(model, 1.0, tau);
  const double log_above = std::log(strikes.above);
  const double log_below = std::log(strikes.below);
  auto upper = [&](double z) {
    return strikes.above / d * tail_order(model, TailDirection::lower, z - log_above, 1.0, tau) *
           envelope_density(model, z);
  };
  auto lower = [&](double z) {
    return strikes.below / d * tail_order(model, TailDirection::upper, z - log_below, 1.0, tau) *
           envelope_density(model, z);
  };
  TruncationBounds b;
  b.d_hat = d;
  b.z_hi = decay_point(upper, log_above + c0, 1.0, tol);
  b.z_lo = decay_point(lower, log_below - c0, -1.0, tol);
  return b;
}

bool ErrorConstant::significant(double k) const noexcept { return std::abs(value) > k * stderr; }

std::vector<double> error_constant_panels(const ModelParams& model, double z_lo, double z_hi,
                                          std::span<const double> kinks, int panels) {
  if (!(z_hi > z_lo)) throw DomainError("error_constant: need z_lo < z_hi");
  if (panels < 1) throw DomainError("error_constant: need at least one panel");
  const double rho_lo = limit_density(model, z_lo);
  const double rho_hi = limit_density(model, z_hi);
  double max_width = std::numeric_limits<double>::infinity();
  if (rho_lo > 0.0 && rho_hi > 0.0) {
    const double slope = (std::log(rho_hi) - std::log(rho_lo)) / (z_hi - z_lo);
    if (slope != 0.0) max_width = std::numbers::ln10 / std::abs(slope);
  }
  std::vector<double> cuts{z_lo};
  for (double k : kinks) {
    if (k > z_lo && k < z_hi) cuts.push_back(k);
  }
  cuts.push_back(z_hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const std::size_t segs = cuts.size() - 1;
  std::vector<int> count(segs);
  int used = 0;
  for (std::size_t s = 0; s < segs; ++s) {
    const double len = cuts[s + 1] - cuts[s];
    count[s] = std::max(1, static_cast<int>(std::ceil(len / max_width - 1e-12)));
    used += count[s];
  }
  for (; used < panels; ++used) {
    std::size_t widest = 0;
    double best = -1.0;
    for (std::size_t s = 0; s < segs; ++s) {
      const double w = (cuts[s + 1] - cuts[s]) / count[s];
      if (w > best) {
        best = w;
        widest = s;
      }
    }
    ++count[widest];
  }
  std::vector<double> edges{cuts.front()};
  for (std::size_t s = 0; s < segs; ++s) {
    const double a = cuts[s];
    const double b = cuts[s + 1];
    for (int i = 1; i < count[s]; ++i) edges.push_back(a + (b - a) * i / count[s]);
    edges.push_back(b);
  }
  return edges;
}

ErrorConstant error_constant(const ModelParams& model, const PayoffPair& pair, double tau,
                             const QuadratureConfig& quad, std::uint64_t seed) {
  require_eligible(model, quad.allow_experimental);
  if (quad.nodes_per_panel < 1 || quad.max_evaluations < quad.nodes_per_panel) {
    throw ConfigError("quadrature: need nodes_per_panel >= 1 and max_evaluations >= nodes_per_panel");
  }
  if (quad.n_paths < 10000) throw ConfigError("quadrature: n_paths must be >= 10000");
  const int steps = resolve_steps(quad.window_steps, tau);

  ErrorConstant out;
  out.fingerprint = error_constant_fingerprint(model, pair, tau);
  out.seed = seed;
  out.n_paths = quad.n_paths;
  out.rule = "composite_gauss_legendre_" + std::to_string(quad.nodes_per_panel);

  if (quad.z_lo && quad.z_hi) {
    out.z_lo = *quad.z_lo;
    out.z_hi = *quad.z_hi;
    out.experimental = model.kind() == ModelKind::vg;
  } else {
    const auto b = truncation_bounds(model, pair, tau, quad.truncation_tol, {seed, 100000});
    out.z_lo = quad.z_lo.value_or(b.z_lo);
    out.z_hi = quad.z_hi.value_or(b.z_hi);
    out.experimental = b.experimental;
  }
  if (!(out.z_hi > out.z_lo)) throw ConfigError("quadrature: z_lo must be < z_hi");

  const PreparedPair prepared(pair, uniform_grid(tau, steps));
  std::vector<double> log_kinks;
  for (double k : prepared.start_price_kinks()) log_kinks.push_back(std::log(k));
  const auto edges = error_constant_panels(model, out.z_lo, out.z_hi, log_kinks,
                                           quad.max_evaluations / quad.nodes_per_panel);
  const auto rule = composite_gauss_legendre(edges, quad.nodes_per_panel);
  std::vector<double> zs(rule.size());
  std::vector<double> w(rule.size());
  for (std::size_t k = 0; k < rule.size(); ++k) {
    zs[k] = rule[k].x;
    w[k] = rule[k].weight * limit_density(model, rule[k].x);
  }
  const auto res = crn_evaluate(model, pair, tau, zs, w, quad.n_paths, seed, steps, std::max(1u, quad.workers));

  out.n_nodes = static_cast<int>(zs.size());
  out.value = res.weighted.mean;
  out.stderr = res.weighted.stderr();
  double var_indep = 0.0;
  out.curve.tau = tau;
  out.curve.pair_id = pair.fingerprint();
  out.curve.model_id = model.fingerprint();
  out.curve.seed = seed;
  out.curve.n_paths = quad.n_paths;
  out.curve.window_steps = steps;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    const double se = res.nodes[k].stderr();
    var_indep += w[k] * w[k] * se * se;
    out.curve.nodes.push_back({zs[k], res.nodes[k].mean, se});
  }
  out.stderr_independent = std::sqrt(var_indep);

  for (const auto* node : {&out.curve.nodes.front(), &out.curve.nodes.back()}) {
    const double tail = std::abs(node->value) * limit_density(model, node->z);
    if (std::abs(node->value) > 3.0 * node->stderr && tail >= quad.truncation_tol) {
      throw TruncationError("error curve is not negligible at z = " + format_g17(node->z) + " (value " +
                            format_g17(node->value) + " +/- " + format_g17(node->stderr) +
                            "); widen the truncation bounds (lower numerics.truncation_tol or set z_lo/z_hi)");
    }
  }
  return out;
}

}  // namespace longmat
