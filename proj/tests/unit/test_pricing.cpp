#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "longmat/asymptotics.hpp"
#include "longmat/errors.hpp"
#include "longmat/levy_models.hpp"
#include "longmat/pricing.hpp"
#include "mixture_oracle.hpp"

namespace lm = longmat;
namespace lt = longmat::testing;

namespace {

const lm::ModelParams bm_desk = lm::BrownianParams{0.0, 0.2, -0.02};
const lm::ModelParams nig = lm::NigParams{0.0, -0.5, 3.0, 3.0, 0.0};
const std::vector<double> desk_offsets{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};

lm::PayoffPair desk_pair() {
  return lm::PayoffPair(lm::DiscreteAsian{desk_offsets, 1.0}, lm::VanillaBasket{{1.0, 1.0, 1.0, 1.0}});
}

long double bs_call(long double m, long double v, long double k) {
  const long double sd = std::sqrt(v);
  const long double lk = std::log(k);
  auto phi = [](long double x) { return 0.5L * std::erfc(-x / std::sqrt(2.0L)); };
  return std::exp(m + v / 2.0L) * phi((m + v - lk) / sd) - k * phi((m - lk) / sd);
}

lm::ErrorConstant fake_constant(const lm::ModelParams& model, const lm::PayoffPair& pair, double tau, double value,
                                double stderr) {
  lm::ErrorConstant c;
  c.value = value;
  c.stderr = stderr;
  c.fingerprint = lm::error_constant_fingerprint(model, pair, tau);
  return c;
}

}  // namespace

TEST(VanillaPrice, Examples) {
  const lm::ModelParams mart = lm::BrownianParams{0.0, 0.2, -0.02};
  const auto e = lm::vanilla_price(mart, 3.0, 0.0);
  EXPECT_EQ(e.value, 1.0);
  EXPECT_EQ(e.method, lm::PriceMethod::closed_form);

  const auto c = lm::vanilla_price(bm_desk, 1.0, 1.0);
  EXPECT_NEAR(c.value, 0.07965567455405796293, 1e-14);
  EXPECT_EQ(c.stderr, 0.0);
  EXPECT_EQ(c.maturity, 1.0);
  EXPECT_THROW(lm::vanilla_price(bm_desk, 0.0, 1.0), lm::DomainError);
  EXPECT_THROW(lm::vanilla_price(bm_desk, 1.0, -1.0), lm::DomainError);
}

TEST(VanillaPrice, BrownianQuadratureMatchesClosedForm) {
  for (double t : {1.0, 5.0, 20.0}) {
    for (double k : {0.5, 1.0, 2.0}) {
      const double cf = lm::vanilla_price(bm_desk, t, k).value;
      const auto q = lm::vanilla_price_quadrature(bm_desk, t, k);
      EXPECT_EQ(q.method, lm::PriceMethod::density_quadrature);
      EXPECT_NEAR(q.value / cf, 1.0, 1e-6) << "t=" << t << " K=" << k;
      EXPECT_NEAR(cf, static_cast<double>(bs_call(-0.02L * t, 0.04L * t, k)), 1e-14);
    }
  }
}

TEST(VanillaPrice, NigQuadratureMatchesMixtureIntegral) {
  const auto& p = std::get<lm::NigParams>(nig.params());
  for (double t : {0.5, 2.0}) {
    for (double k : {0.8, 1.0, 1.3}) {
      // E[(e^Z - K)^+] = E[ call(Z | IG) ], Z | IG ~ N(theta IG + b t, IG)
      const long double mean = p.delta * t / p.mu;
      const long double shape = p.delta * p.delta * t * t;
      const auto ref = lt::integrate_log_mixture(
          [&](long double s) {
            return lt::log_ig_density(s, mean, shape) + std::log(bs_call(p.theta * s + p.b * t, s, k));
          },
          mean);
      const auto q = lm::vanilla_price(nig, t, k);
      EXPECT_EQ(q.method, lm::PriceMethod::density_quadrature);
      EXPECT_NEAR(q.value / static_cast<double>(ref), 1.0, 1e-8) << "t=" << t << " K=" << k;
    }
  }
}

TEST(VanillaPrice, NigInfiniteMeanRejected) {
  const lm::ModelParams heavy = lm::NigParams{0.0, 0.5, 0.5, 1.0, 0.0};
  EXPECT_THROW(lm::vanilla_price(heavy, 1.0, 1.0), lm::DomainError);
}

TEST(VanillaPrice, VgMonteCarloMatchesGammaMixture) {
  const lm::VarianceGammaParams p{0.0, 0.3, -0.1, 0.05, 0.5};
  lm::PricingOptions opts;
  opts.mc_paths = 200000;
  opts.seed = 4;
  for (double k : {0.8, 1.0, 1.25}) {
    const double t = 2.0;
    const auto ref = lt::integrate_log_mixture(
        [&](long double s) {
          return lt::log_gamma_density(s, t / p.lambda, p.lambda) +
                 std::log(bs_call(p.theta * s + p.m * t, p.sigma * p.sigma * s, k));
        },
        t);
    const auto e = lm::vanilla_price(p, t, k, opts);
    EXPECT_EQ(e.method, lm::PriceMethod::monte_carlo);
    EXPECT_EQ(e.n_paths, 200000u);
    ASSERT_TRUE(e.seed.has_value());
    EXPECT_GT(e.stderr, 0.0);
    EXPECT_NEAR(e.value, static_cast<double>(ref), 3.0 * e.stderr) << "K=" << k;
  }
}

TEST(DigitalProbability, BrownianClosedForm) {
  const double p = lm::digital_probability(bm_desk, 4.0, 1.2);
  EXPECT_NEAR(p, 0.5 * std::erfc((std::log(1.2) + 0.08) / 0.4 / std::sqrt(2.0)), 1e-14);
  EXPECT_THROW(lm::digital_probability(bm_desk, 4.0, 0.0), lm::DomainError);
}

TEST(ApproxPriceTilde, DegenerateCases) {
  const double t = 10.0;
  const lm::PayoffPair single(lm::DiscreteAsian{{0.0}, 1.1}, lm::VanillaBasket{{1.1}});
  EXPECT_EQ(lm::approx_price_tilde(bm_desk, single, t, 1.0).value, lm::vanilla_price(bm_desk, t, 1.1).value);

  const lm::PayoffPair sv(lm::IntegralAsian{1.0}, lm::ScaledVanilla{1.0, 1.0});
  EXPECT_EQ(lm::approx_price_tilde(bm_desk, sv, t, 1.0).value, lm::vanilla_price(bm_desk, t - 1.0, 1.0).value);

  const double k = 1.0;
  const lm::PayoffPair gap(lm::PartialBarrier{k, k * (1.0 + 1e-10)}, lm::GapCall{k, k * (1.0 + 1e-10)});
  EXPECT_NEAR(lm::approx_price_tilde(bm_desk, gap, t, 1.0).value, lm::vanilla_price(bm_desk, t, k).value, 1e-9);

  EXPECT_THROW(lm::approx_price_tilde(bm_desk, desk_pair(), 1.0, 1.0), lm::DomainError);
}

TEST(ApproxPriceTilde, BasketIsMeanOfSnappedVanillas) {
  const double t = 20.0;
  double ref = 0.0;
  for (int idx : {252, 168, 84, 0}) ref += lm::vanilla_price(bm_desk, t - 1.0 + idx / 252.0, 1.0).value / 4.0;
  EXPECT_NEAR(lm::approx_price_tilde(bm_desk, desk_pair(), t, 1.0).value, ref, 1e-15);
}

TEST(ApproxPriceTilde, GapCallDecomposition) {
  const lm::PayoffPair gap(lm::PartialBarrier{1.0, 1.2}, lm::GapCall{1.0, 1.2});
  const double t = 5.0;
  const double v = 0.04 * t;
  const double m = -0.02 * t;
  // E[(S - K) 1{S >= L}] for lognormal S
  const double direct = std::exp(m + v / 2) * 0.5 * std::erfc((std::log(1.2) - m - v) / std::sqrt(2 * v)) -
                        1.0 * 0.5 * std::erfc((std::log(1.2) - m) / std::sqrt(2 * v));
  EXPECT_NEAR(lm::approx_price_tilde(bm_desk, gap, t, 1.0).value, direct, 1e-13);
}

TEST(ApproxPriceTilde, StrikeProfileTrapezoid) {
  const lm::PayoffPair p(lm::IntegralAsian{1.0}, lm::StrikeProfileBasket{});
  lm::PricingOptions opts;
  opts.window_steps = 16;
  const double t = 8.0;
  double ref = 0.0;
  for (int i = 0; i <= 16; ++i) {
    const double w = (i == 0 || i == 16 ? 0.5 : 1.0) / 16.0;
    ref += w * lm::vanilla_price(bm_desk, t - 1.0 + i / 16.0, 1.0).value;
  }
  EXPECT_NEAR(lm::approx_price_tilde(bm_desk, p, t, 1.0, opts).value, ref, 1e-14);
}

TEST(AsymptoticPrice, ComponentsIdentityAndZeroConstant) {
  const auto pair = desk_pair();
  const auto c = fake_constant(bm_desk, pair, 1.0, -0.0083, 1e-5);
  const auto e = lm::asymptotic_price(bm_desk, pair, 40.0, 1.0, c);
  ASSERT_TRUE(e.components.has_value());
  const auto& k = *e.components;
  EXPECT_EQ(e.value, k.a_tilde + k.c_err * k.alpha_value);
  EXPECT_EQ(k.alpha_value, lm::alpha(bm_desk, 39.0));
  EXPECT_EQ(e.method, lm::PriceMethod::asymptotic);
  EXPECT_NEAR(e.stderr, 1e-5 * k.alpha_value, 1e-18);

  const auto zero = lm::asymptotic_price(bm_desk, pair, 40.0, 1.0, fake_constant(bm_desk, pair, 1.0, 0.0, 0.0));
  EXPECT_EQ(zero.value, lm::approx_price_tilde(bm_desk, pair, 40.0, 1.0).value);
}

TEST(AsymptoticPrice, FingerprintMismatchIsConsistencyError) {
  const auto c = fake_constant(bm_desk, desk_pair(), 1.0, -0.008, 1e-5);
  const lm::ModelParams other = lm::BrownianParams{0.0, 0.25, -0.02};
  EXPECT_THROW(lm::asymptotic_price(other, desk_pair(), 40.0, 1.0, c), lm::ConsistencyError);
  EXPECT_THROW(lm::asymptotic_price(bm_desk, desk_pair(), 40.0, 0.5, c), lm::ConsistencyError);
  const lm::PayoffPair p2(lm::DiscreteAsian{desk_offsets, 1.0}, lm::VanillaBasket{{0.9, 1.1, 1.0, 1.0}});
  EXPECT_THROW(lm::asymptotic_price(bm_desk, p2, 40.0, 1.0, c), lm::ConsistencyError);
}

TEST(AsymptoticPrice, CorrectionDecaysMonotonically) {
  const auto c = fake_constant(bm_desk, desk_pair(), 1.0, -0.0083, 1e-5);
  double prev = INFINITY;
  for (double t : {2.0, 3.0, 5.0, 10.0, 20.0, 40.0, 80.0, 160.0, 1000.0}) {
    const auto e = lm::asymptotic_price(bm_desk, desk_pair(), t, 1.0, c);
    const double corr = std::abs(e.components->c_err * e.components->alpha_value);
    EXPECT_LT(corr, prev) << "T=" << t;
    prev = corr;
  }
}

TEST(RatioStudy, ExactCopyGivesZeroRatios) {
  const lm::PayoffPair p(lm::DiscreteAsian{desk_offsets, 1.0}, lm::ExactCopy{});
  lm::StudyOptions opts;
  opts.pricing.mc_paths = 2000;
  opts.quadrature.n_paths = 10000;
  const auto table = lm::ratio_convergence_study(bm_desk, p, 1.0, {10.0, 20.0}, 2000, 3, opts);
  ASSERT_EQ(table.rows.size(), 2u);
  for (const auto& r : table.rows) {
    EXPECT_EQ(r.ratio, 0.0);
    EXPECT_EQ(r.ratio_stderr, 0.0);
  }
  EXPECT_EQ(table.error_constant.value, 0.0);
}

TEST(RatioStudy, RowsAndResolutions) {
  lm::StudyOptions opts;
  opts.resolutions = {1, 2};
  opts.window_steps = 24;
  opts.quadrature.n_paths = 10000;
  const auto c = fake_constant(bm_desk, desk_pair(), 1.0, -0.008, 1e-4);
  const auto table = lm::ratio_convergence_study(bm_desk, desk_pair(), 1.0, {10.0, 30.0}, 5000, 3, opts, c);
  ASSERT_EQ(table.rows.size(), 4u);
  EXPECT_EQ(table.rows[0].window_steps, 24);
  EXPECT_EQ(table.rows[2].window_steps, 48);
  for (const auto& r : table.rows) {
    EXPECT_EQ(r.alpha_value, lm::alpha(bm_desk, r.maturity - 1.0));
    EXPECT_NEAR(r.ratio * r.alpha_value, r.a_mc - r.a_tilde, 1e-14);
    EXPECT_NEAR(r.a_mc, r.a_mc_plain, 4.0 * r.a_mc_plain_stderr);
    EXPECT_GT(r.ratio_stderr, 0.0);
  }
  EXPECT_EQ(table.error_constant.value, -0.008);
}

TEST(RatioStudy, Errors) {
  lm::StudyOptions opts;
  opts.quadrature.n_paths = 10000;
  const auto c = fake_constant(bm_desk, desk_pair(), 1.0, -0.008, 1e-4);
  EXPECT_THROW(lm::ratio_convergence_study(bm_desk, desk_pair(), 1.0, {20.0, 10.0}, 1000, 3, opts, c),
               lm::ConfigError);
  EXPECT_THROW(lm::ratio_convergence_study(bm_desk, desk_pair(), 1.0, {1.0}, 1000, 3, opts, c), lm::ConfigError);
  opts.target_ratio_stderr = 1e-6;
  try {
    lm::ratio_convergence_study(bm_desk, desk_pair(), 1.0, {10.0}, 1000, 3, opts, c);
    FAIL() << "expected a budget error";
  } catch (const lm::BudgetError& e) {
    EXPECT_GT(e.required_paths(), 1000u);
  }
  const lm::ModelParams other = lm::BrownianParams{0.0, 0.3, -0.02};
  EXPECT_THROW(lm::ratio_convergence_study(other, desk_pair(), 1.0, {10.0}, 1000, 3, {}, c), lm::ConsistencyError);
}
