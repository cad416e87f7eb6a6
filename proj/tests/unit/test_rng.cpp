#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "longmat/parallel.hpp"
#include "longmat/rng.hpp"

namespace lm = longmat;

// Known-answer vectors of the Philox4x32-10 reference implementation.
TEST(Philox, KnownAnswerVectors) {
  using C = lm::Philox4x32::Counter;
  using K = lm::Philox4x32::Key;
  EXPECT_EQ(lm::Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}),
            (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(lm::Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     K{0xffffffffu, 0xffffffffu}),
            (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(lm::Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     K{0xa4093822u, 0x299f31d0u}),
            (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStream, DeterministicPerPathAndDomain) {
  lm::RandomStream a(42, 7, lm::StreamDomain::window);
  lm::RandomStream b(42, 7, lm::StreamDomain::window);
  lm::RandomStream c(42, 8, lm::StreamDomain::window);
  lm::RandomStream d(42, 7, lm::StreamDomain::marginal);
  lm::RandomStream e(43, 7, lm::StreamDomain::window);
  const double va = a.uniform();
  EXPECT_EQ(va, b.uniform());
  EXPECT_NE(va, c.uniform());
  EXPECT_NE(va, d.uniform());
  EXPECT_NE(va, e.uniform());
}

TEST(RandomStream, UniformOpenIntervalAndMoments) {
  lm::RandomStream rng(1, 0, lm::StreamDomain::validation);
  lm::RunningStats s;
  for (int i = 0; i < 1000000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    s.add(u);
  }
  EXPECT_NEAR(s.mean, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / 1e6) * 1.5);
  EXPECT_NEAR(s.variance(), 1.0 / 12.0, 1e-3);
}

TEST(RandomStream, NormalMoments) {
  lm::RandomStream rng(2, 0, lm::StreamDomain::validation);
  lm::RunningStats s;
  lm::RunningStats s4;
  for (int i = 0; i < 1000000; ++i) {
    const double x = rng.normal();
    s.add(x);
    s4.add(x * x * x * x);
  }
  EXPECT_NEAR(s.mean, 0.0, 3e-3);
  EXPECT_NEAR(s.variance(), 1.0, 4e-3);
  EXPECT_NEAR(s4.mean, 3.0, 4.0 * s4.stderr());
}

TEST(RandomStream, GammaMeanAndVariance) {
  for (double shape : {0.05, 0.5, 1.0, 3.7}) {
    lm::RandomStream rng(3, 0, lm::StreamDomain::validation);
    lm::RunningStats s;
    for (int i = 0; i < 400000; ++i) {
      const double g = rng.gamma(shape);
      ASSERT_GE(g, 0.0);
      s.add(g);
    }
    EXPECT_NEAR(s.mean, shape, 4.0 * s.stderr()) << "shape=" << shape;
    EXPECT_NEAR(s.variance() / shape, 1.0, 0.05) << "shape=" << shape;
  }
}

TEST(RandomStream, InverseGaussianMeanAndVariance) {
  for (auto [m, l] : {std::pair{1.0, 1.0}, std::pair{0.2, 4.0}, std::pair{3.0, 0.5}}) {
    lm::RandomStream rng(4, 0, lm::StreamDomain::validation);
    lm::RunningStats s;
    for (int i = 0; i < 400000; ++i) {
      const double x = rng.inverse_gaussian(m, l);
      ASSERT_GT(x, 0.0);
      s.add(x);
    }
    EXPECT_NEAR(s.mean, m, 4.0 * s.stderr());
    EXPECT_NEAR(s.variance() / (m * m * m / l), 1.0, 0.1);
  }
}

TEST(RunningStats, MergeMatchesSequential) {
  lm::RunningStats all;
  lm::RunningStats a;
  lm::RunningStats b;
  for (int i = 0; i < 1000; ++i) {
    const double x = std::sin(i * 0.37) * 10 + i * 1e-3;
    all.add(x);
    (i < 377 ? a : b).add(x);
  }
  a.merge(b);
  EXPECT_EQ(a.n, all.n);
  EXPECT_NEAR(a.mean, all.mean, 1e-12);
  EXPECT_NEAR(a.variance(), all.variance(), 1e-10);
}

TEST(RunChunks, ResultsInChunkOrderForAnyWorkerCount) {
  auto run = [](unsigned workers) {
    return lm::run_chunks(10000, 333, workers, [](std::size_t idx, std::size_t begin, std::size_t end) {
      return std::vector<std::size_t>{idx, begin, end};
    });
  };
  const auto one = run(1);
  EXPECT_EQ(one.size(), 31u);
  EXPECT_EQ(one, run(3));
  EXPECT_EQ(one, run(8));
  EXPECT_EQ(one.back()[2], 10000u);
}
