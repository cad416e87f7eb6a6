#include "longmat/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "longmat/errors.hpp"

namespace longmat {

namespace {

constexpr double kSeriesLimit = 2.0;
constexpr int kMaxIterations = 10000;
constexpr double kEps = 1e-17;

// K_1(y) = 1/y + ln(y/2) I_1(y) - (y/4) sum_k [psi(k+1) + psi(k+2)] (y^2/4)^k / (k! (k+1)!)
double k1_series(double y) {
  const double q = 0.25 * y * y;
  double term = 1.0;  // (y^2/4)^k / (k! (k+1)!)
  double psi_k1 = -std::numbers::egamma;        // psi(k+1)
  double psi_k2 = 1.0 - std::numbers::egamma;   // psi(k+2)
  double i1_sum = 0.0;
  double psi_sum = 0.0;
  for (int k = 0; k < 200; ++k) {
    i1_sum += term;
    psi_sum += (psi_k1 + psi_k2) * term;
    if (term < kEps * i1_sum) break;
    term *= q / ((k + 1.0) * (k + 2.0));
    psi_k1 += 1.0 / (k + 1.0);
    psi_k2 += 1.0 / (k + 2.0);
  }
  const double i1 = 0.5 * y * i1_sum;
  return 1.0 / y + std::log(0.5 * y) * i1 - 0.25 * y * psi_sum;
}

// Steed's CF2 for order zero, returning e^y K_0(y) and e^y K_1(y).
void k01_scaled_cf(double y, double& k0s, double& k1s) {
  double b = 2.0 * (1.0 + y);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  int i = 1;
  for (; i < kMaxIterations; ++i) {
    a -= 2.0 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  if (i == kMaxIterations) {
    throw NumericError("bessel_k1: continued fraction did not converge at y=" + std::to_string(y));
  }
  h = a1 * h;
  k0s = std::sqrt(std::numbers::pi / (2.0 * y)) / s;
  k1s = k0s * (y + 0.5 - h) / y;
}

void require_positive(double y) {
  if (!(y > 0.0) || std::isnan(y)) {
    throw DomainError("bessel_k1: argument must be > 0, got " + std::to_string(y));
  }
}

}  // namespace

double bessel_k1(double y) {
  require_positive(y);
  if (std::isinf(y)) return 0.0;
  if (y <= kSeriesLimit) return k1_series(y);
  double k0s = 0.0;
  double k1s = 0.0;
  k01_scaled_cf(y, k0s, k1s);
  return k1s * std::exp(-y);
}

double bessel_k1_scaled(double y) {
  require_positive(y);
  if (y <= kSeriesLimit) return k1_series(y) * std::exp(y);
  if (std::isinf(y)) return 0.0;
  double k0s = 0.0;
  double k1s = 0.0;
  k01_scaled_cf(y, k0s, k1s);
  return k1s;
}

double normal_tail(double xi) {
  return 0.5 * std::erfc(xi / std::numbers::sqrt2);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace longmat
