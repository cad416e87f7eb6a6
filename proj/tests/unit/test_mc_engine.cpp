#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ks.hpp"
#include "longmat/errors.hpp"
#include "longmat/levy_models.hpp"
#include "longmat/mc_engine.hpp"
#include "longmat/parallel.hpp"
#include "longmat/pricing.hpp"

namespace lm = longmat;
namespace lt = longmat::testing;

namespace {

const lm::ModelParams bm0 = lm::BrownianParams{0.0, 0.2, 0.0};
const lm::ModelParams bm_desk = lm::BrownianParams{0.0, 0.2, -0.02};
const lm::ModelParams nig_sym = lm::NigParams{0.0, 0.0, 1.0, 1.0, 0.0};
const lm::ModelParams nig_heavy_free = lm::NigParams{0.0, -0.5, 3.0, 3.0, 0.0};
const lm::ModelParams vg = lm::VarianceGammaParams{0.0, 0.3, -0.1, 0.05, 0.5};
const std::vector<double> desk_offsets{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};

std::vector<double> marginal_draws(const lm::ModelParams& m, double t, std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  for (std::size_t p = 0; p < n; ++p) {
    lm::RandomStream rng(seed, p, lm::StreamDomain::validation);
    out[p] = lm::sample_marginal(m, t, rng);
  }
  return out;
}

}  // namespace

TEST(SimPlan, ResolveValidates) {
  lm::SimPlan plan{bm_desk, 10.0, 1.0, 0, 1000, 1};
  EXPECT_EQ(lm::resolve(plan).window_steps, 252);
  plan.n_paths = 99;
  EXPECT_THROW(lm::resolve(plan), lm::ConfigError);
  plan.n_paths = 1000;
  plan.maturity = 0.5;
  EXPECT_THROW(lm::resolve(plan), lm::ConfigError);
  plan.maturity = 10.0;
  plan.tau = 0.0;
  EXPECT_THROW(lm::resolve(plan), lm::ConfigError);
}

TEST(SampleMarginal, BrownianMean) {
  const auto xs = marginal_draws(bm0, 4.0, 1000000, 1);
  lm::RunningStats s;
  for (double x : xs) s.add(x);
  EXPECT_NEAR(s.mean, 0.0, 3.0 * 0.4 / 1e3);
  EXPECT_NEAR(std::sqrt(s.variance()), 0.4, 2e-3);
}

TEST(SampleMarginal, NigSubordinatorMeanIsWaldIdentity) {
  // E[IG(t)] = delta t / mu via the sampler's parameter mapping.
  const double t = 2.0;
  const double delta = 1.0;
  const double mu = 1.0;
  lm::RunningStats s;
  for (std::size_t p = 0; p < 1000000; ++p) {
    lm::RandomStream rng(2, p, lm::StreamDomain::validation);
    s.add(rng.inverse_gaussian(delta * t / mu, delta * delta * t * t));
  }
  EXPECT_NEAR(s.mean, delta * t / mu, 3.0 * s.stderr());

  const lm::ModelParams m = lm::NigParams{0.3, -0.4, 1.5, 0.8, 0.1};
  lm::RunningStats z;
  for (double x : marginal_draws(m, t, 400000, 3)) z.add(x);
  EXPECT_NEAR(z.mean, lm::marginal_mean(m, t), 3.0 * z.stderr());
  EXPECT_NEAR(std::sqrt(z.variance()) / lm::marginal_stddev(m, t), 1.0, 0.01);
}

// The inverse-Gaussian law used for the subordinator equals the first-passage
// time of B_s + mu s to delta t, simulated here on a fine grid.
TEST(SampleMarginal, InverseGaussianMappingMatchesFirstPassage) {
  const double mu = 1.5;
  const double delta = 0.8;
  const double t = 1.0;
  const std::size_t n = 3000;
  std::mt19937_64 gen(77);
  std::normal_distribution<double> norm(0.0, 1.0);
  const double dt = 2e-5;
  const double sq = std::sqrt(dt);
  std::vector<double> passage(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = 0.0;
    double s = 0.0;
    while (x <= delta * t) {
      x += sq * norm(gen) + mu * dt;
      s += dt;
    }
    passage[i] = s;
  }
  std::vector<double> direct(n);
  for (std::size_t p = 0; p < n; ++p) {
    lm::RandomStream rng(5, p, lm::StreamDomain::validation);
    direct[p] = rng.inverse_gaussian(delta * t / mu, delta * delta * t * t);
  }
  EXPECT_LT(lt::ks_two_sample(passage, direct), lt::ks_critical_1pct(n, n));
}

TEST(SampleMarginal, VarianceGammaClockMean) {
  // E[Z_t] = z0 + theta E[gamma(t)] + m t with E[gamma(t)] = t.
  const auto& p = std::get<lm::VarianceGammaParams>(vg.params());
  lm::RunningStats s;
  for (double x : marginal_draws(vg, 3.0, 400000, 4)) s.add(x);
  EXPECT_NEAR(s.mean, p.z0 + p.theta * 3.0 + p.m * 3.0, 3.0 * s.stderr());
  lm::RunningStats g;
  for (std::size_t i = 0; i < 400000; ++i) {
    lm::RandomStream rng(6, i, lm::StreamDomain::validation);
    g.add(p.lambda * rng.gamma(3.0 / p.lambda));
  }
  EXPECT_NEAR(g.mean, 3.0, 3.0 * g.stderr());
}

TEST(SampleMarginal, KolmogorovSmirnovAgainstModelLaw) {
  const auto bm = marginal_draws(bm_desk, 1.0 / 252.0, 100000, 8);
  const double sd = 0.2 / std::sqrt(252.0);
  const double d_bm =
      lt::ks_statistic(bm, [&](double x) { return 0.5 * std::erfc(-(x + 0.02 / 252.0) / sd / std::sqrt(2.0)); });
  EXPECT_LT(d_bm, lt::ks_critical_1pct(bm.size()));

  for (const auto& m : {nig_sym, vg}) {
    const auto xs = marginal_draws(m, 0.5, 4000, 9);
    const double d = lt::ks_statistic(xs, [&](double x) { return 1.0 - lm::marginal_tail(m, 0.5, x); });
    EXPECT_LT(d, lt::ks_critical_1pct(xs.size())) << m.fingerprint();
  }
}

TEST(WindowSampler, OneStepLawMatchesMarginal) {
  for (const auto& m : {bm_desk, nig_sym, vg}) {
    const std::size_t n = 100000;
    const std::vector<double> times{0.0, 0.25};
    std::vector<double> out(2);
    std::vector<double> window(n);
    for (std::size_t p = 0; p < n; ++p) {
      lm::RandomStream rng(10, p, lm::StreamDomain::window);
      lm::sample_window_log(m, 0.0, times, rng, out);
      window[p] = out[1];
    }
    const auto direct = marginal_draws(m.with_z0(0.0), 0.25, n, 11);
    EXPECT_LT(lt::ks_two_sample(window, direct), lt::ks_critical_1pct(n, n)) << m.fingerprint();
  }
}

TEST(WindowSampler, PositiveAndConstantWhenDegenerate) {
  for (const auto& m : {bm_desk, nig_sym, vg}) {
    for (std::size_t p = 0; p < 200; ++p) {
      lm::RandomStream rng(12, p, lm::StreamDomain::window);
      const auto w = lm::sample_window_path(m, 0.1, 1.0, 252, rng);
      ASSERT_EQ(w.size(), 253u);
      EXPECT_NEAR(w.values()[0], std::exp(0.1), 1e-15);
      for (double v : w.values()) ASSERT_GT(v, 0.0);
    }
  }
  const lm::ModelParams still = lm::BrownianParams{0.0, 1e-300, 0.0};
  lm::RandomStream rng(13, 0, lm::StreamDomain::window);
  const auto w = lm::sample_window_path(still, 0.0, 1.0, 1, rng);
  EXPECT_EQ(w.values()[0], 1.0);
  EXPECT_EQ(w.values()[1], 1.0);
}

TEST(McPrice, DegenerateModelPricesZero) {
  const lm::ModelParams still = lm::BrownianParams{0.0, 1e-300, 0.0};
  const auto e = lm::mc_price(lm::SimPlan{still, 5.0, 1.0, 0, 1000, 1}, lm::DiscreteAsian{desk_offsets, 1.0});
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.stderr, 0.0);
  EXPECT_EQ(e.method, lm::PriceMethod::monte_carlo);
  EXPECT_EQ(e.n_paths, 1000u);
}

TEST(McPrice, SingleLookbackIsVanilla) {
  for (const auto& m : {bm_desk, nig_heavy_free}) {
    const double t = 6.0;
    const auto e = lm::mc_price(lm::SimPlan{m, t, 1.0, 0, 100000, 3}, lm::DiscreteLookback{{0.0}, 1.0});
    const double v = lm::vanilla_price(m, t, 1.0).value;
    EXPECT_NEAR(e.value, v, 3.0 * e.stderr) << m.fingerprint();
  }
}

TEST(McPrice, LowBarrierIsVanilla) {
  const double t = 6.0;
  const auto e = lm::mc_price(lm::SimPlan{bm_desk, t, 1.0, 0, 100000, 3}, lm::PartialBarrier{0.01, 0.02});
  EXPECT_NEAR(e.value, lm::vanilla_price(bm_desk, t, 0.01).value, 3.0 * e.stderr);
}

TEST(McPrice, BitIdenticalAcrossWorkerCounts) {
  const lm::PayoffPair pair(lm::DiscreteAsian{desk_offsets, 1.0}, lm::VanillaBasket{{1.0, 1.0, 1.0, 1.0}});
  lm::SimPlan plan{nig_sym, 20.0, 1.0, 0, 10000, 5, 1000, 1};
  const auto a = lm::mc_price(plan, pair);
  plan.workers = 4;
  const auto b = lm::mc_price(plan, pair);
  EXPECT_EQ(a.g.value, b.g.value);
  EXPECT_EQ(a.g.stderr, b.g.stderr);
  EXPECT_EQ(a.difference.value, b.difference.value);
  EXPECT_EQ(a.difference.stderr, b.difference.stderr);
  EXPECT_NEAR(a.difference.value, a.g.value - a.g_tilde.value, 1e-10);
}

TEST(McPrice, PairMatchesRawPayoff) {
  const lm::PayoffPair pair(lm::PartialBarrier{1.0, 1.2}, lm::GapCall{1.0, 1.2});
  const lm::SimPlan plan{bm_desk, 10.0, 1.0, 0, 5000, 7};
  EXPECT_EQ(lm::mc_price(plan, pair).g.value, lm::mc_price(plan, pair.payoff()).value);
}

TEST(ReflectionCheck, BrownianDriftFreeIsTight) {
  std::vector<double> a_grid;
  for (int i = 1; i <= 10; ++i) a_grid.push_back(0.1 * i);
  const auto r = lm::reflection_check(bm0, 1.0, a_grid, 100000, 1);
  EXPECT_NEAR(r.d_hat, 0.5, 1e-15);
  EXPECT_TRUE(r.bridge_corrected);
  EXPECT_EQ(r.u_floor, 0.05);
  EXPECT_EQ(r.rows.size(), 10u);
  EXPECT_TRUE(r.all_hold());
  for (const auto& row : r.rows) {
    EXPECT_LE(std::abs(row.gap_upper), 3.0 * row.gap_upper_stderr) << "a=" << row.a;
    EXPECT_LE(std::abs(row.gap_lower), 3.0 * row.gap_lower_stderr) << "a=" << row.a;
    EXPECT_GE(row.p_sup, row.p_terminal_upper);
    EXPECT_GE(row.p_inf, row.p_terminal_lower);
  }
}

TEST(ReflectionCheck, DriftAndNigHold) {
  const std::vector<double> a_grid{0.1, 0.4, 0.7, 1.0};
  const auto drift = lm::reflection_check(lm::BrownianParams{0.0, 0.2, -0.05}, 1.0, a_grid, 50000, 2);
  EXPECT_TRUE(drift.all_hold());
  EXPECT_LT(drift.d_hat, 0.5);
  const auto nig = lm::reflection_check(nig_sym, 1.0, a_grid, 20000, 3, 252, 2);
  EXPECT_FALSE(nig.bridge_corrected);
  EXPECT_TRUE(nig.all_hold());
  EXPECT_THROW(lm::reflection_check(vg, 1.0, a_grid, 1000, 3), lm::UnsupportedError);
}
