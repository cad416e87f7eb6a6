#include "longmat/mc_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "longmat/errors.hpp"

namespace longmat {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct PairAccumulator {
  RunningStats g;
  RunningStats g_tilde;
  RunningStats difference;
};

PriceEstimate mc_estimate(const RunningStats& s, const SimPlan& plan) {
  PriceEstimate e;
  e.value = s.mean;
  e.stderr = s.stderr();
  e.method = PriceMethod::monte_carlo;
  e.maturity = plan.maturity;
  e.seed = plan.seed;
  e.n_paths = s.n;
  return e;
}

}  // namespace

std::string_view to_string(PriceMethod method) {
  switch (method) {
    case PriceMethod::closed_form: return "closed_form";
    case PriceMethod::density_quadrature: return "density_quadrature";
    case PriceMethod::monte_carlo: return "monte_carlo";
    case PriceMethod::asymptotic: return "asymptotic";
  }
  return "unknown";
}

SimPlan resolve(const SimPlan& plan) {
  SimPlan out = plan;
  if (!(plan.tau > 0.0) || !std::isfinite(plan.tau)) throw ConfigError("simulation: tau must be > 0");
  if (!(plan.maturity >= plan.tau) || !std::isfinite(plan.maturity)) {
    throw ConfigError("simulation: maturity must be finite and >= tau");
  }
  if (plan.n_paths < 100) throw ConfigError("simulation: n_paths must be >= 100");
  if (plan.window_steps < 0) throw ConfigError("simulation: window_steps must be >= 0");
  if (out.window_steps == 0) out.window_steps = default_window_steps(plan.tau);
  if (out.chunk_paths == 0) out.chunk_paths = kDefaultChunk;
  if (out.workers == 0) out.workers = 1;
  return out;
}

double sample_increment(const ModelParams& model, double dt, RandomStream& rng) {
  return std::visit(
      overloaded{
          [&](const BrownianParams& p) { return p.sigma * std::sqrt(dt) * rng.normal() + p.mu * dt; },
          [&](const NigParams& p) {
            const double level = p.delta * dt;
            const double ig = rng.inverse_gaussian(level / p.mu, level * level);
            return p.theta * ig + std::sqrt(ig) * rng.normal() + p.b * dt;
          },
          [&](const VarianceGammaParams& p) {
            const double g = p.lambda * rng.gamma(dt / p.lambda);
            return p.theta * g + p.sigma * std::sqrt(g) * rng.normal() + p.m * dt;
          },
      },
      model.params());
}

double sample_marginal(const ModelParams& model, double t, RandomStream& rng) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("sample_marginal: t must be > 0");
  return model.z0() + sample_increment(model, t, rng);
}

void sample_window_log(const ModelParams& model, double start_log, std::span<const double> times,
                       RandomStream& rng, std::span<double> out) {
  if (times.empty() || out.size() != times.size()) {
    throw DomainError("sample_window_log: output size must match the grid");
  }
  out[0] = start_log;
  for (std::size_t k = 1; k < times.size(); ++k) {
    out[k] = out[k - 1] + sample_increment(model, times[k] - times[k - 1], rng);
  }
}

PathWindow sample_window_path(const ModelParams& model, double start_log, double tau, int steps,
                              RandomStream& rng) {
  if (steps < 1) throw DomainError("sample_window_path: steps must be >= 1");
  auto times = uniform_grid(tau, steps);
  std::vector<double> values(times.size());
  sample_window_log(model, start_log, times, rng, values);
  for (double& v : values) v = std::exp(v);
  return PathWindow(tau, std::move(times), std::move(values));
}

PairEstimate mc_price(const SimPlan& raw_plan, const PayoffPair& pair) {
  const SimPlan plan = resolve(raw_plan);
  const auto times = uniform_grid(plan.tau, plan.window_steps);
  const PreparedPair prepared(pair, times);
  const double jump = plan.maturity - plan.tau;

  auto chunks = run_chunks(plan.n_paths, plan.chunk_paths, plan.workers,
                           [&](std::size_t, std::size_t begin, std::size_t end) {
    PairAccumulator acc;
    std::vector<double> logs(times.size());
    std::vector<double> values(times.size());
    for (std::size_t p = begin; p < end; ++p) {
      double start = plan.model.z0();
      if (jump > 0.0) {
        RandomStream marginal(plan.seed, p, StreamDomain::marginal);
        start = sample_marginal(plan.model, jump, marginal);
      }
      RandomStream window(plan.seed, p, StreamDomain::window);
      sample_window_log(plan.model, 0.0, times, window, logs);
      for (std::size_t k = 0; k < logs.size(); ++k) values[k] = std::exp(start + logs[k]);
      const double g = prepared.g(values);
      const double gt = prepared.g_tilde(values);
      acc.g.add(g);
      acc.g_tilde.add(gt);
      acc.difference.add(g - gt);
    }
    return acc;
  });

  PairAccumulator total;
  for (const auto& c : chunks) {
    total.g.merge(c.g);
    total.g_tilde.merge(c.g_tilde);
    total.difference.merge(c.difference);
  }
  return {mc_estimate(total.g, plan), mc_estimate(total.g_tilde, plan),
          mc_estimate(total.difference, plan)};
}

PriceEstimate mc_price(const SimPlan& plan, const Payoff& payoff) {
  return mc_price(plan, PayoffPair(payoff, ExactCopy{})).g;
}

// ---------------------------------------------------------------------------
// Reflection
// ---------------------------------------------------------------------------

bool ReflectionReport::all_hold() const noexcept {
  return std::all_of(rows.begin(), rows.end(),
                     [](const ReflectionRow& r) { return r.upper_holds && r.lower_holds; });
}

namespace {

// P(max of a Brownian bridge path through the grid values exceeds a), given
// every grid value is below a. Steps further than ~40 exponent units away
// contribute nothing at double precision.
double bridge_crossing(std::span<const double> x, double a, double var_step) {
  double log_survive = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const double e = 2.0 * (a - x[k]) * (a - x[k + 1]) / var_step;
    if (e < 40.0) log_survive += std::log1p(-std::exp(-e));
  }
  return -std::expm1(log_survive);
}

struct ReflectionAccumulator {
  std::vector<RunningStats> terminal_upper, sup, terminal_lower, inf, gap_upper, gap_lower;
  explicit ReflectionAccumulator(std::size_t n = 0)
      : terminal_upper(n), sup(n), terminal_lower(n), inf(n), gap_upper(n), gap_lower(n) {}
};

}  // namespace

ReflectionReport reflection_check(const ModelParams& model, double tau, std::span<const double> a_grid,
                                  std::size_t n_paths, std::uint64_t seed, int steps,
                                  unsigned workers, int d_grid_points) {
  if (model.kind() == ModelKind::vg) throw UnsupportedError("reflection_check: VG is not supported");
  if (!(tau > 0.0)) throw DomainError("reflection_check: tau must be > 0");
  if (steps < 1) throw DomainError("reflection_check: steps must be >= 1");
  if (n_paths < 100) throw ConfigError("reflection_check: n_paths must be >= 100");
  for (double a : a_grid) {
    if (!(a > 0.0)) throw DomainError("reflection_check: a_grid must be positive");
  }
  ReflectionReport report;
  report.d_hat = reflection_constant(model, tau, d_grid_points);
  if (!(report.d_hat > 0.0)) {
    throw UnsupportedError("reflection_check: estimated D is not positive (one-sided process)");
  }
  report.u_floor = tau / d_grid_points;
  report.d_grid_points = d_grid_points;
  report.n_paths = n_paths;
  report.steps = steps;

  const ModelParams zero = model.with_z0(0.0);
  const auto times = uniform_grid(tau, steps);
  const std::size_t na = a_grid.size();
  const double d = report.d_hat;
  double var_step = 0.0;
  if (const auto* bm = std::get_if<BrownianParams>(&model.params())) {
    var_step = bm->sigma * bm->sigma * tau / steps;
    report.bridge_corrected = true;
  }

  auto chunks = run_chunks(n_paths, kDefaultChunk, workers,
                           [&](std::size_t, std::size_t begin, std::size_t end) {
    ReflectionAccumulator acc(na);
    std::vector<double> z(times.size());
    std::vector<double> neg(times.size());
    for (std::size_t p = begin; p < end; ++p) {
      RandomStream rng(seed, p, StreamDomain::reflection);
      sample_window_log(zero, 0.0, times, rng, z);
      const auto [lo_it, hi_it] = std::minmax_element(z.begin(), z.end());
      const double zmax = *hi_it;
      const double zmin = *lo_it;
      const double last = z.back();
      bool neg_ready = false;
      for (std::size_t i = 0; i < na; ++i) {
        const double a = a_grid[i];
        double q_sup = zmax > a ? 1.0 : 0.0;
        double q_inf = zmin < -a ? 1.0 : 0.0;
        if (report.bridge_corrected) {
          const double far = std::sqrt(20.0 * var_step);
          if (q_sup == 0.0 && a - zmax < far) q_sup = bridge_crossing(z, a, var_step);
          if (q_inf == 0.0 && zmin + a < far) {
            if (!neg_ready) {
              for (std::size_t k = 0; k < z.size(); ++k) neg[k] = -z[k];
              neg_ready = true;
            }
            q_inf = bridge_crossing(neg, a, var_step);
          }
        }
        const double tu = last > a ? 1.0 : 0.0;
        const double tl = last < -a ? 1.0 : 0.0;
        acc.terminal_upper[i].add(tu);
        acc.sup[i].add(q_sup);
        acc.terminal_lower[i].add(tl);
        acc.inf[i].add(q_inf);
        acc.gap_upper[i].add(tu - d * q_sup);
        acc.gap_lower[i].add(tl - d * q_inf);
      }
    }
    return acc;
  });

  ReflectionAccumulator total(na);
  for (const auto& c : chunks) {
    for (std::size_t i = 0; i < na; ++i) {
      total.terminal_upper[i].merge(c.terminal_upper[i]);
      total.sup[i].merge(c.sup[i]);
      total.terminal_lower[i].merge(c.terminal_lower[i]);
      total.inf[i].merge(c.inf[i]);
      total.gap_upper[i].merge(c.gap_upper[i]);
      total.gap_lower[i].merge(c.gap_lower[i]);
    }
  }
  for (std::size_t i = 0; i < na; ++i) {
    ReflectionRow row;
    row.a = a_grid[i];
    row.p_terminal_upper = total.terminal_upper[i].mean;
    row.p_sup = total.sup[i].mean;
    row.p_terminal_lower = total.terminal_lower[i].mean;
    row.p_inf = total.inf[i].mean;
    row.gap_upper = total.gap_upper[i].mean;
    row.gap_upper_stderr = total.gap_upper[i].stderr();
    row.gap_lower = total.gap_lower[i].mean;
    row.gap_lower_stderr = total.gap_lower[i].stderr();
    row.upper_holds = row.gap_upper >= -3.0 * row.gap_upper_stderr;
    row.lower_holds = row.gap_lower >= -3.0 * row.gap_lower_stderr;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace longmat
