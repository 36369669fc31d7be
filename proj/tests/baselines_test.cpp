// Copyright 2026 The imvu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "imvu/baselines.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "imvu/accountant.hpp"

namespace imvu {
namespace {

BaselineConfig Config(BaselineKind kind, Norm norm, double c, double noise) {
  BaselineConfig cfg;
  cfg.kind = kind;
  cfg.clip = {norm, c};
  cfg.noise = noise;
  return cfg;
}

TEST(LaplaceTest, NoNoiseAtInfiniteEps) {
  Rng rng(1);
  const auto cfg = Config(BaselineKind::kLaplace, Norm::kL1, 1.0,
                          std::numeric_limits<double>::infinity());
  const Vector u = {3.0, -1.0};
  EXPECT_EQ(LaplaceMech(u, cfg, rng), Clip(u, cfg.clip));
}

TEST(LaplaceTest, VarianceMatchesClosedForm) {
  Rng rng(2);
  const auto cfg = Config(BaselineKind::kLaplace, Norm::kL1, 1.0, 5.0);
  const double expected = 2.0 * (1.0 / 5.0) * (1.0 / 5.0);
  EXPECT_NEAR(expected, 0.08, 1e-15);
  const int n = 1000000;
  double s = 0, s2 = 0;
  const Vector u = {0.0};
  for (int k = 0; k < n; ++k) {
    const double v = LaplaceMech(u, cfg, rng)[0];
    s += v;
    s2 += v * v;
  }
  const double var = s2 / n - (s / n) * (s / n);
  EXPECT_LE(std::abs(var - expected), 0.02 * expected);
}

TEST(GaussianTest, StdAndMean) {
  Rng rng(3);
  const auto cfg = Config(BaselineKind::kGaussian, Norm::kL2, 2.0, 0.7);
  const Vector u = {0.3, -0.2};
  const int n = 1000000;
  double s = 0, s2 = 0;
  for (int k = 0; k < n; ++k) {
    const double v = GaussianMech(u, cfg, rng)[0];
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  const double sd = std::sqrt(s2 / n - mean * mean);
  EXPECT_LE(std::abs(sd - 1.4), 0.01 * 1.4);
  EXPECT_NEAR(mean, 0.3, 5 * 1.4 / std::sqrt(n));
}

TEST(GaussianTest, TinyNoiseReturnsClippedInput) {
  Rng rng(4);
  const auto cfg = Config(BaselineKind::kGaussian, Norm::kL2, 1.0, 1e-300);
  const Vector u = {3.0, 4.0};
  const Vector out = GaussianMech(u, cfg, rng);
  EXPECT_NEAR(out[0], 0.6, 1e-15);
  EXPECT_NEAR(out[1], 0.8, 1e-15);
}

TEST(SignSgdTest, SignsAndSymmetry) {
  Rng rng(5);
  const auto tiny = Config(BaselineKind::kSignSgd, Norm::kL2, 1.0, 1e-9);
  const Vector u = {1e6, -1e6, 0.5};
  const Vector s = SignSgd(u, tiny, rng);
  EXPECT_EQ(s, (Vector{1.0, -1.0, 1.0}));

  const auto cfg = Config(BaselineKind::kSignSgd, Norm::kL2, 1.0, 1.0);
  const int n = 200000;
  int plus = 0;
  const Vector zero = {0.0};
  for (int k = 0; k < n; ++k) plus += SignSgd(zero, cfg, rng)[0] > 0;
  EXPECT_NEAR(static_cast<double>(plus) / n, 0.5, 3 * 0.5 / std::sqrt(n));
}

TEST(SignSgdTest, LedgerMatchesGaussian) {
  // Post-processing: the per-round RDP cost is the Gaussian one.
  const auto alphas = DefaultAlphas();
  PrivacyLedger g = PrivacyLedger::Rdp(alphas), s = PrivacyLedger::Rdp(alphas);
  for (int t = 0; t < 10; ++t) {
    g.AddRdpRound(GaussianRdp(1.3, alphas));
    s.AddRdpRound(GaussianRdp(1.3, alphas));
  }
  EXPECT_EQ(g.Compose(), s.Compose());
}

TEST(BaselineTest, NormRequirementsAndDeterminism) {
  Rng rng(6);
  const Vector u = {0.1};
  EXPECT_THROW(
      LaplaceMech(u, Config(BaselineKind::kLaplace, Norm::kL2, 1, 1), rng),
      Error);
  EXPECT_THROW(
      GaussianMech(u, Config(BaselineKind::kGaussian, Norm::kL1, 1, 1), rng),
      Error);
  EXPECT_THROW(
      SignSgd(u, Config(BaselineKind::kGaussian, Norm::kL2, 1, 1), rng),
      Error);
  const auto cfg = Config(BaselineKind::kGaussian, Norm::kL2, 1, 1);
  Rng a(9), b(9);
  EXPECT_EQ(GaussianMech(Vector(50, 0.0), cfg, a),
            GaussianMech(Vector(50, 0.0), cfg, b));
}

}  // namespace
}  // namespace imvu
