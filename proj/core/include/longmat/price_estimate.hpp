#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace longmat {

enum class PriceMethod { closed_form, density_quadrature, monte_carlo, asymptotic };

std::string_view to_string(PriceMethod method);

/// Breakdown of an asymptotic price: value = a_tilde + c_err * alpha_value.
struct PriceComponents {
  double a_tilde = 0.0;
  double c_err = 0.0;
  double alpha_value = 0.0;
  double a_tilde_stderr = 0.0;
};

struct PriceEstimate {
  double value = 0.0;
  double stderr = 0.0;
  PriceMethod method = PriceMethod::closed_form;
  double maturity = 0.0;
  std::optional<PriceComponents> components;
  std::optional<std::uint64_t> seed;  // set for Monte Carlo results
  std::size_t n_paths = 0;
};

}  // namespace longmat
