#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace longmat::testing {

// Densities of subordinated Brownian motion Z_t = z0 + W_{S} + theta S + drift t
// (NIG: S inverse Gaussian; VG: sigma W_S with S gamma), computed by direct
// quadrature over the mixing variable in long double. Independent of the
// closed forms used by the library.

inline long double log_ig_density(long double s, long double mean, long double shape) {
  return 0.5L * std::log(shape / (2.0L * std::numbers::pi_v<long double> * s * s * s)) -
         shape * (s - mean) * (s - mean) / (2.0L * mean * mean * s);
}

inline long double log_gamma_density(long double s, long double k, long double scale) {
  return (k - 1.0L) * std::log(s) - s / scale - std::lgamma(k) - k * std::log(scale);
}

inline long double log_normal_density(long double x, long double mean, long double var) {
  return -0.5L * std::log(2.0L * std::numbers::pi_v<long double> * var) - (x - mean) * (x - mean) / (2.0L * var);
}

// int exp(log_f(s)) ds over s in (0, inf) via the substitution s = e^u on a
// fine uniform grid in u, after locating the mode of the integrand.
inline long double integrate_log_mixture(const std::function<long double(long double)>& log_f, long double s_hint) {
  auto log_g = [&](long double u) { return log_f(std::exp(u)) + u; };
  const int n_scan = 4000;
  const long double lo = std::log(s_hint) - 30.0L;
  const long double hi = std::log(s_hint) + 12.0L;
  long double best_u = lo;
  long double best = -INFINITY;
  for (int i = 0; i <= n_scan; ++i) {
    const long double u = lo + (hi - lo) * i / n_scan;
    const long double v = log_g(u);
    if (v > best) {
      best = v;
      best_u = u;
    }
  }
  // Curvature estimate sets the step; integrate until the integrand is 1e-40 of the peak.
  const long double d = 1e-3L;
  const long double curv = -(log_g(best_u + d) - 2.0L * best + log_g(best_u - d)) / (d * d);
  const long double width = curv > 0.0L ? 1.0L / std::sqrt(curv) : 1.0L;
  const long double h = std::min(width / 40.0L, 0.01L);
  long double sum = 0.0L;
  for (int dir : {1, -1}) {
    for (long k = dir == 1 ? 0 : 1;; ++k) {
      const long double u = best_u + dir * h * static_cast<long double>(k);
      const long double v = log_g(u) - best;
      sum += std::exp(v);
      if (v < -92.0L || k > 4000000) break;
    }
  }
  return std::exp(best) * sum * h;
}

// NIG: S = IG(t) with mean delta t / mu and shape (delta t)^2; Z = z0 + theta S + N(0, S) + b t.
inline long double nig_density_mixture(long double z0, long double theta, long double mu, long double delta,
                                       long double b, long double t, long double z) {
  const long double mean = delta * t / mu;
  const long double shape = delta * delta * t * t;
  return integrate_log_mixture(
      [&](long double s) { return log_ig_density(s, mean, shape) + log_normal_density(z, z0 + theta * s + b * t, s); },
      mean);
}

// VG: S = gamma with shape t / lambda, scale lambda; Z = z0 + theta S + sigma N(0, S) + m t.
inline long double vg_density_mixture(long double z0, long double sigma, long double theta, long double m,
                                      long double lambda, long double t, long double z) {
  return integrate_log_mixture(
      [&](long double s) {
        return log_gamma_density(s, t / lambda, lambda) +
               log_normal_density(z, z0 + theta * s + m * t, sigma * sigma * s);
      },
      t);
}

inline long double vg_tail_mixture(long double z0, long double sigma, long double theta, long double m,
                                   long double lambda, long double t, long double a) {
  return integrate_log_mixture(
      [&](long double s) {
        const long double x = (a - z0 - theta * s - m * t) / (sigma * std::sqrt(s));
        const long double tail = 0.5L * std::erfc(x / std::sqrt(2.0L));
        return log_gamma_density(s, t / lambda, lambda) + std::log(std::max(tail, 1e-4000L));
      },
      t);
}

}  // namespace longmat::testing
