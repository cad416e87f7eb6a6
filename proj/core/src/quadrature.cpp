#include "longmat/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "longmat/errors.hpp"

namespace longmat {

std::vector<QuadratureNode> gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
  std::vector<QuadratureNode> rule(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule[static_cast<std::size_t>(i)] = {-x, w};
    rule[static_cast<std::size_t>(n - 1 - i)] = {x, w};
  }
  if (n % 2 == 1) rule[static_cast<std::size_t>(n / 2)].x = 0.0;
  return rule;
}

std::vector<QuadratureNode> composite_gauss_legendre(std::span<const double> edges, int nodes_per_panel) {
  if (edges.size() < 2) throw DomainError("composite_gauss_legendre: need at least one panel");
  const auto base = gauss_legendre(nodes_per_panel);
  std::vector<QuadratureNode> out;
  out.reserve((edges.size() - 1) * base.size());
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double lo = edges[p];
    const double hi = edges[p + 1];
    if (!(hi > lo)) throw DomainError("composite_gauss_legendre: edges must be strictly increasing");
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (const auto& node : base) out.push_back({mid + half * node.x, half * node.weight});
  }
  return out;
}

IntegrationResult integrate_adaptive(const std::function<double(double)>& f,
                                     std::span<const double> breakpoints, double rel_tol,
                                     double abs_tol) {
  using boost::math::quadrature::gauss_kronrod;
  IntegrationResult total;
  double resolution = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (!(b > a)) continue;
    // Nodes are placed to within eps * max(|a|, |b|), which caps the relative
    // accuracy attainable on a piece that is short compared with its offset.
    const double node_noise = 64.0 * std::numeric_limits<double>::epsilon() *
                              std::max(std::abs(a), std::abs(b)) / (b - a);
    double err = 0.0;
    double v = gauss_kronrod<double, 31>::integrate(f, a, b, 0, rel_tol * 0.1, &err);
    if (err > (rel_tol * 0.1 + node_noise) * std::abs(v)) {
      v = gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel_tol * 0.1, &err);
    }
    total.value += v;
    total.error += err;
    resolution += node_noise * std::abs(v);
  }
  if (!std::isfinite(total.value) ||
      total.error > rel_tol * std::abs(total.value) + abs_tol + resolution) {
    throw NumericError("integrate_adaptive: error estimate " + std::to_string(total.error) +
                       " exceeds tolerance for value " + std::to_string(total.value));
  }
  return total;
}

}  // namespace longmat
