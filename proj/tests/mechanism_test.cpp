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

#include "imvu/mechanism.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "imvu/oracle.hpp"
#include "test_tables.hpp"

namespace imvu {
namespace {

using testing::Designed;
using testing::Rr3;

TEST(TableTest, NaturalParamsAreLogProbabilities) {
  const MechanismTable t = Rr3();
  const Matrix eta = NaturalParams(t);
  EXPECT_NEAR(eta[0][0], -0.28768, 1e-5);
  EXPECT_NEAR(eta[0][1], -1.38629, 1e-5);
  EXPECT_EQ(eta, t.log_probs());
}

TEST(TableTest, UniformRowGivesEqualNaturalParams) {
  const double l2 = std::log(2.0);
  const MechanismTable t = MechanismTable::Create(
      {-0.5, 1.5},
      {{std::log(0.75), std::log(0.25)}, {-l2, -l2},
       {std::log(0.25), std::log(0.75)}},
      std::log(4.0));
  EXPECT_EQ(NaturalParams(t)[1], (Vector{-l2, -l2}));
}

TEST(TableTest, RejectsZeroProbability) {
  const double ninf = -std::numeric_limits<double>::infinity();
  try {
    MechanismTable::Create({0.0, 1.0}, {{0.0, ninf}, {ninf, 0.0}}, 1.0);
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
    EXPECT_NE(std::string(e.what()).find("positivity"), std::string::npos);
  }
}

TEST(TableTest, RejectsBiasedAndNonPrivateTables) {
  const Matrix lp = Rr3().log_probs();
  try {
    MechanismTable::Create({-0.4, 1.5}, lp, std::log(3.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unbiasedness"), std::string::npos);
  }
  try {
    MechanismTable::Create({-0.5, 1.5}, lp, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("metric_dp"), std::string::npos);
  }
}

TEST(InterpolateTest, GridPointsReturnRowsExactly) {
  const MechanismTable& t = Designed(4, 4, 1.0);
  for (int i = 0; i < t.b_in(); ++i) {
    EXPECT_EQ(InterpolateEta(t, t.grid()[i]), t.log_probs()[i]);
  }
}

TEST(InterpolateTest, MidpointAndExtrapolation) {
  const MechanismTable t = Rr3();
  const Matrix& eta = t.log_probs();
  const Vector mid = InterpolateEta(t, 0.5);
  const Vector left = InterpolateEta(t, -1.0);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(mid[j], (eta[0][j] + eta[1][j]) / 2, 1e-15);
    EXPECT_NEAR(left[j], 2 * eta[0][j] - eta[1][j], 1e-15);
  }
}

TEST(InterpolateTest, ExtrapolatesBoundarySegmentsForLargerGrids) {
  const MechanismTable& t = Designed(4, 2, 1.0);
  const Matrix& eta = t.log_probs();
  // x = 1 + 1/3 continues the last segment one more spacing.
  const Vector right = InterpolateEta(t, 4.0 / 3.0);
  const Vector left = InterpolateEta(t, -1.0 / 3.0);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(right[j], 2 * eta[3][j] - eta[2][j], 1e-12);
    EXPECT_NEAR(left[j], 2 * eta[0][j] - eta[1][j], 1e-12);
  }
}

TEST(InterpolateTest, RejectsNonFiniteInput) {
  const MechanismTable t = Rr3();
  EXPECT_THROW(InterpolateEta(t, std::nan("")), Error);
  EXPECT_THROW(InterpolateEta(t, INFINITY), Error);
}

TEST(PmfTest, MatchesRowsAtGridPoints) {
  const MechanismTable& t = Designed(8, 8, 5.0);
  for (int i = 0; i < t.b_in(); ++i) {
    const Vector p = Pmf(t, t.grid()[i]);
    const Vector row = t.probs(i);
    for (int j = 0; j < t.b_out(); ++j) EXPECT_NEAR(p[j], row[j], 1e-12);
  }
}

TEST(PmfTest, RandomizedResponseAtPointSix) {
  const Vector p = Pmf(Rr3(), 0.6);
  // sigmoid((2x - 1) ln 3) evaluated by the oracle.
  const Vector q = oracle::ExactPmf(Rr3(), 0.6L);
  EXPECT_NEAR(p[0], 0.44529, 1e-5);
  EXPECT_NEAR(p[1], 0.55471, 1e-5);
  EXPECT_NEAR(p[1], q[1], 1e-15);
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
}

TEST(PmfTest, StrictlyPositiveFarFromGrid) {
  const MechanismTable& t = Designed(2, 8, 5.0);
  for (double x : {-50.0, -4.0, 0.3, 5.0, 50.0}) {
    const Vector lp = LogPmf(t, x);
    for (double v : lp) EXPECT_TRUE(std::isfinite(v));
    double s = 0.0;
    for (double v : Pmf(t, x)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(SampleTest, InverseCdfUsesStrictComparison) {
  const Vector p = {0.25, 0.5, 0.25};
  EXPECT_EQ(SampleIndex(p, 0.0), 0);
  EXPECT_EQ(SampleIndex(p, 0.25), 1);
  EXPECT_EQ(SampleIndex(p, 0.7499), 1);
  EXPECT_EQ(SampleIndex(p, 0.75), 2);
  EXPECT_EQ(SampleIndex(Vector{1.0, 0.0}, 0.999999), 0);
}

TEST(SampleTest, DeterministicUnderSeed) {
  const MechanismTable& t = Designed(4, 4, 1.0);
  Rng a(7), b(7);
  for (int k = 0; k < 1000; ++k) {
    EXPECT_EQ(SampleAt(t, 0.37, a).index, SampleAt(t, 0.37, b).index);
  }
}

TEST(SampleTest, FrequenciesMatchPmf) {
  const MechanismTable& t = Designed(2, 4, 1.0);
  const double x = 0.8;
  const Vector p = oracle::ExactPmf(t, x);
  Rng rng(11);
  const int n = 1000000;
  std::vector<int> counts(t.b_out(), 0);
  for (int k = 0; k < n; ++k) ++counts[SampleAt(t, x, rng).index];
  for (int j = 0; j < t.b_out(); ++j) {
    const double f = static_cast<double>(counts[j]) / n;
    EXPECT_LE(std::abs(f - p[j]), 3 * std::sqrt(p[j] * (1 - p[j]) / n) + 1e-12)
        << "outcome " << j;
  }
}

TEST(MomentsTest, RandomizedResponseAtZero) {
  const Moments m = MomentsAt(Rr3(), 0.0);
  EXPECT_NEAR(m.mean, 0.0, 1e-12);
  EXPECT_NEAR(m.variance, 0.75, 1e-12);
}

TEST(MomentsTest, UnbiasedAtGridPointsAndNonNegativeVariance) {
  const MechanismTable& t = Designed(8, 4, 1.0);
  for (int i = 0; i < t.b_in(); ++i) {
    EXPECT_NEAR(MomentsAt(t, t.grid()[i]).mean, t.grid()[i], 1e-6);
  }
  for (double x = -2; x <= 3; x += 0.01) {
    EXPECT_GE(MomentsAt(t, x).variance, 0.0);
  }
}

TEST(DitherTest, LinearInterpolationOfRows) {
  const MechanismTable t = Rr3();
  const Vector p = MvuDitherPmf(t, 0.3);
  EXPECT_NEAR(p[0], 0.7 * 0.75 + 0.3 * 0.25, 1e-15);
  EXPECT_NEAR(p[1], 0.7 * 0.25 + 0.3 * 0.75, 1e-15);
  EXPECT_EQ(MvuDitherPmf(t, 1.0), t.probs(1));
}

TEST(DitherTest, UnbiasedOnUnitInterval) {
  const MechanismTable& t = Designed(4, 8, 5.0);
  for (int k = 0; k <= 200; ++k) {
    const double x = k / 200.0;
    EXPECT_NEAR(MomentsOf(t.alphabet(), MvuDitherPmf(t, x)).mean, x, 1e-6);
  }
}

TEST(DitherTest, RejectsOutsideUnitInterval) {
  try {
    MvuDitherPmf(Rr3(), 1.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInput);
  }
  EXPECT_THROW(MvuDitherPmf(Rr3(), -1e-9), Error);
}

TEST(ClipTest, ScalesOntoBallAndLeavesInteriorUntouched) {
  const ClipConfig l2{Norm::kL2, 1.5};
  const Vector big = {3.0, 0.0, 0.0, 0.0};  // norm 2C
  const Vector c = Clip(big, l2);
  EXPECT_DOUBLE_EQ(NormOf(c, Norm::kL2), 1.5);
  const Vector inside = {0.1, -0.2, 0.3};
  EXPECT_EQ(Clip(inside, l2), inside);
  EXPECT_EQ(Clip(Vector{0.0, 0.0}, l2), (Vector{0.0, 0.0}));
  const ClipConfig l1{Norm::kL1, 1.0};
  EXPECT_LE(NormOf(Clip(Vector{3.0, -4.0, 5.0}, l1), Norm::kL1), 1.0 + 1e-12);
}

TEST(ScaleTest, ExamplesAndRoundTrip) {
  EXPECT_DOUBLE_EQ(ScaleInput(0.0, 2.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(ScaleInput(2.0, 2.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(ScaleInput(-1.0, 1.0, 8.0), -3.5);
  EXPECT_DOUBLE_EQ(Decode(0.5, 1.0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(Decode(1.0, 1.0, 1.0), 1.0);
  Rng rng(3);
  const double c = 0.7;
  for (int k = 0; k < 100; ++k) {
    const double u = c * (2 * Uniform01(rng) - 1);
    for (double beta : {0.5, 1.0, 8.0}) {
      EXPECT_LE(std::abs(Decode(ScaleInput(u, c, beta), c, beta) - u),
                1e-12 * c);
    }
  }
}

TEST(ScaleTest, ScaledVectorStaysInBetaBall) {
  Rng rng(5);
  const ClipConfig cfg{Norm::kL2, 2.0};
  const double beta = 3.0;
  for (int k = 0; k < 50; ++k) {
    Vector u(10);
    for (double& v : u) v = 5 * StandardNormal(rng);
    const Vector c = Clip(u, cfg);
    double s = 0.0;
    for (double v : c) {
      const double d = ScaleInput(v, cfg.clip_c, beta) - 0.5;
      s += d * d;
    }
    EXPECT_LE(std::sqrt(s), beta / 2 + 1e-12);
  }
}

TEST(PrivatizeTest, ZeroVectorSamplesAtOneHalf) {
  const InterpolatedMechanism m(Rr3(), 1.0, {Norm::kL2, 1.0});
  Rng a(9);
  const PrivatizedVector v = PrivatizeVector(m, Vector{0, 0, 0}, a);
  ASSERT_EQ(v.indices.size(), 3u);
  // Replay: one key draw, then block 0 of that key.
  Rng b(9);
  Rng sub = Substream(b(), 0);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(v.indices[k], static_cast<std::uint32_t>(SampleAt(m, 0.5, sub).index));
    EXPECT_DOUBLE_EQ(v.decoded[k],
                     Decode(m.table().alphabet()[v.indices[k]], 1.0, 1.0));
  }
}

TEST(PrivatizeTest, IndependentOfWorkerCount) {
  const InterpolatedMechanism m(Designed(4, 8, 1.0), 2.0, {Norm::kL2, 1.0});
  Rng data(1);
  Vector u(3000);
  for (double& v : u) v = StandardNormal(data) * 0.02;
  PrivatizedVector ref;
  for (int workers : {1, 2, 3, 8}) {
    Rng rng(42);
    PrivatizedVector v = PrivatizeVector(m, u, rng, workers);
    if (workers == 1) {
      ref = v;
    } else {
      EXPECT_EQ(v.indices, ref.indices);
      EXPECT_EQ(v.decoded, ref.decoded);
    }
  }
}

TEST(PrivatizeTest, MarginalMatchesPmf) {
  const InterpolatedMechanism m(Designed(2, 4, 1.0), 1.0, {Norm::kL2, 1.0});
  const Vector u = {0.3, -0.4};
  const double x0 = ScaleInput(0.3, 1.0, 1.0);
  const Vector p = oracle::ExactPmf(m.table(), x0);
  Rng rng(17);
  const int n = 100000;
  std::vector<int> counts(4, 0);
  for (int k = 0; k < n; ++k) ++counts[PrivatizeVector(m, u, rng).indices[0]];
  for (int j = 0; j < 4; ++j) {
    EXPECT_LE(std::abs(static_cast<double>(counts[j]) / n - p[j]),
              3 * std::sqrt(p[j] * (1 - p[j]) / n) + 1e-12);
  }
}

TEST(PrivatizeTest, RejectsEmptyAndNonFinite) {
  const InterpolatedMechanism m(Rr3());
  Rng rng(1);
  EXPECT_THROW(PrivatizeVector(m, Vector{}, rng), Error);
  EXPECT_THROW(PrivatizeVector(m, Vector{NAN}, rng), Error);
}

TEST(MechanismTest, FisherConstantRequiresTwoRows) {
  EXPECT_THROW(InterpolatedMechanism(Designed(4, 2, 1.0), 1.0, {}, 0.1, 1.0),
               Error);
  EXPECT_NO_THROW(InterpolatedMechanism(Rr3(), 1.0, {}, 0.1, 1.0));
}

TEST(MechanismTest, BitsPerCoordinate) {
  EXPECT_EQ(BitsPerCoordinate(Rr3()), 1);
  EXPECT_EQ(BitsPerCoordinate(Designed(2, 8, 1.0)), 3);
}

}  // namespace
}  // namespace imvu
