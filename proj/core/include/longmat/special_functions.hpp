#pragma once

namespace longmat {

/// Modified Bessel function of the second kind, order one.
///
/// Power series around the origin for y <= 2 and Steed's continued fraction
/// (Temme's form) above. Relative accuracy is close to machine precision on
/// [1e-6, 700]; for larger arguments the result underflows and callers should
/// work with bessel_k1_scaled instead.
double bessel_k1(double y);

/// e^y * K_1(y). Finite for every y > 0.
double bessel_k1_scaled(double y);

/// Upper tail of the standard normal, P(N > xi).
double normal_tail(double xi);

double normal_pdf(double x);

}  // namespace longmat
