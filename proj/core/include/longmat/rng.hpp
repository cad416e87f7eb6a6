#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace longmat {

/// Philox4x32-10 block function (Salmon et al., counter-based).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

/// Stream domains: independent sequences for the same (seed, path).
enum class StreamDomain : std::uint32_t {
  marginal = 1,   // jump from 0 to T - tau
  window = 2,     // unit-started window increments
  reflection = 3,
  vanilla = 4,
  tails = 5,
  validation = 6,
};

/// Per-path random stream. The sequence depends only on (seed, path, domain),
/// never on which thread draws it.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t path, StreamDomain domain) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_lo_(static_cast<std::uint32_t>(path)),
        path_hi_(static_cast<std::uint32_t>(path >> 32)),
        domain_(static_cast<std::uint32_t>(domain)) {}

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept {
    if (pos_ == 2) refill();
    const std::uint64_t bits = words_[pos_++];
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang; shapes below one are boosted.
  double gamma(double shape) noexcept {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return std::exp(std::log(g) + std::log(uniform()) / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  /// Inverse Gaussian with mean m and shape l (Michael-Schucany-Haas).
  double inverse_gaussian(double m, double l) noexcept {
    const double n = normal();
    const double y = n * n;
    const double my = m * y;
    const double x = m - 2.0 * m * my / (my + std::sqrt(my * my + 4.0 * m * l * y));
    if (uniform() * (m + x) <= m) return x;
    return m * m / x;
  }

 private:
  void refill() noexcept {
    const auto out = Philox4x32::generate({block_++, path_lo_, path_hi_, domain_}, key_);
    words_[0] = (std::uint64_t{out[0]} << 32) | out[1];
    words_[1] = (std::uint64_t{out[2]} << 32) | out[3];
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t path_lo_;
  std::uint32_t path_hi_;
  std::uint32_t domain_;
  std::uint32_t block_ = 0;
  std::array<std::uint64_t, 2> words_{};
  int pos_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace longmat
