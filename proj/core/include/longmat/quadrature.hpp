#pragma once

#include <functional>
#include <span>
#include <vector>

namespace longmat {

struct QuadratureNode {
  double x;
  double weight;
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes in increasing order.
std::vector<QuadratureNode> gauss_legendre(int n);

/// Composite Gauss-Legendre over consecutive panels [edges[i], edges[i+1]].
std::vector<QuadratureNode> composite_gauss_legendre(std::span<const double> edges, int nodes_per_panel);

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod integration of f over the pieces delimited by
/// `breakpoints` (sorted). Each piece is integrated separately so narrow
/// features must be bracketed by the caller. Throws NumericError if the
/// estimated error exceeds rel_tol * |value| + abs_tol.
IntegrationResult integrate_adaptive(const std::function<double(double)>& f,
                                     std::span<const double> breakpoints,
                                     double rel_tol = 1e-10, double abs_tol = 1e-300);

}  // namespace longmat
