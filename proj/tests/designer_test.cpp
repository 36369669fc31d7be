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

#include "imvu/designer.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "imvu/accountant.hpp"
#include "test_tables.hpp"

namespace imvu {
namespace {

using testing::Designed;

TEST(DesignTest, RecoversRandomizedResponseAtLn3) {
  DesignSpec spec;
  spec.eps = std::log(3.0);
  const MechanismTable t = DesignMvu(spec);
  EXPECT_NEAR(t.alphabet()[0], -0.5, 1e-5);
  EXPECT_NEAR(t.alphabet()[1], 1.5, 1e-5);
  EXPECT_NEAR(t.probs(0)[0], 0.75, 1e-5);
  EXPECT_NEAR(t.probs(0)[1], 0.25, 1e-5);
  EXPECT_NEAR(t.probs(1)[0], 0.25, 1e-5);
  EXPECT_NEAR(t.probs(1)[1], 0.75, 1e-5);
}

class ClosedFormTest : public ::testing::TestWithParam<double> {};

TEST_P(ClosedFormTest, MatchesRandomizedResponse) {
  const double eps = GetParam();
  const double e = std::exp(eps);
  const MechanismTable& t = Designed(2, 2, eps);
  EXPECT_NEAR(t.alphabet()[0], -1.0 / (e - 1.0), 1e-5);
  EXPECT_NEAR(t.alphabet()[1], e / (e - 1.0), 1e-5);
  EXPECT_NEAR(t.probs(0)[0], e / (1.0 + e), 1e-5);
  EXPECT_NEAR(t.probs(1)[1], e / (1.0 + e), 1e-5);
}

INSTANTIATE_TEST_SUITE_P(Eps, ClosedFormTest,
                         ::testing::Values(0.5, 1.0, std::log(3.0), 2.0, 5.0));

TEST(DesignTest, ScaleGridOracleFindsNothingBetter) {
  // Independent scan of the LP optimum over alphabet scales.
  for (double eps : {0.5, 2.0}) {
    const MechanismTable& t = Designed(2, 2, eps);
    const double best = TotalGridVariance(t);
    DesignSpec spec;
    spec.eps = eps;
    const auto [lo, hi] = spec.ScaleRange();
    for (int k = 0; k <= 200; ++k) {
      const double s = lo + (hi - lo) * k / 200.0;
      const ScaleEvaluation ev = SolveForAlphabet(2, AffineAlphabet(2, s), eps);
      if (ev.feasible) EXPECT_GE(ev.total_variance, best - 1e-7) << s;
    }
  }
}

TEST(DesignTest, NoPrivacyLimitApproachesIdentity) {
  const MechanismTable& t = Designed(2, 2, 50.0);
  EXPECT_GT(t.probs(0)[0], 0.9999);
  EXPECT_GT(t.probs(1)[1], 0.9999);
  EXPECT_NEAR(t.alphabet()[0], 0.0, 1e-3);
  EXPECT_NEAR(t.alphabet()[1], 1.0, 1e-3);
  EXPECT_LT(TotalGridVariance(t), 1e-3);
}

TEST(DesignTest, DesignedTablesValidate) {
  for (int b_in : {2, 4, 8}) {
    for (int b_out : {2, 4, 8}) {
      for (double eps : {0.25, 1.0, 5.0}) {
        const MechanismTable& t = Designed(b_in, b_out, eps);
        const ValidationReport r = ValidateTable(t, 1e-6);
        EXPECT_TRUE(r.passed()) << b_in << "/" << b_out << "/" << eps << ": "
                                << r.FirstFailure();
        for (int i = 0; i < b_in; ++i) {
          for (double p : t.probs(i)) EXPECT_GE(p, 1e-12 * (1 - 1e-9));
        }
      }
    }
  }
}

TEST(DesignTest, OptimumNonIncreasingInEps) {
  double prev = INFINITY;
  for (double eps : {0.5, 1.0, 2.0, 5.0}) {
    const double v = TotalGridVariance(Designed(4, 4, eps));
    EXPECT_LE(v, prev + 1e-7) << eps;
    prev = v;
  }
}

TEST(DesignTest, TwoRowDesignsAreAnadromicAndFisherReady) {
  for (int b_out : {2, 4, 8}) {
    for (double eps : {0.25, 1.0, 5.0}) {
      const MechanismTable& t = Designed(2, b_out, eps);
      const Matrix& eta = t.log_probs();
      for (int j = 0; j < b_out; ++j) {
        EXPECT_NEAR(eta[0][j], eta[1][b_out - 1 - j], 1e-9);
      }
      EXPECT_NO_THROW(FisherSup(t));
    }
  }
}

TEST(DesignTest, SpecValidation) {
  DesignSpec bad;
  bad.b_in = 1;
  EXPECT_THROW(DesignMvu(bad), Error);
  DesignSpec big;
  big.b_in = 65;
  big.b_out = 64;
  try {
    DesignMvu(big);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSize);
  }
  DesignSpec tol;
  tol.lp_tol = 1e-3;
  EXPECT_THROW(DesignMvu(tol), Error);
}

TEST(DesignTest, InfeasibleScaleRangeIsADesignError) {
  // Scale 1/2 makes the alphabet {0, 1}; unbiasedness then forces
  // deterministic rows, which no finite eps allows.
  DesignSpec spec;
  spec.eps = 1.0;
  spec.alphabet_scale_range = std::make_pair(0.5, 0.5000001);
  try {
    DesignMvu(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDesign);
  }
}

TEST(AnadromicTest, AveragingFormula) {
  const Matrix out = AnadromicAverage({{0.8, 0.2}, {0.25, 0.75}});
  EXPECT_NEAR(out[0][0], 0.775, 1e-15);
  EXPECT_NEAR(out[0][1], 0.225, 1e-15);
  EXPECT_NEAR(out[1][0], 0.225, 1e-15);
  EXPECT_NEAR(out[1][1], 0.775, 1e-15);
}

TEST(AnadromicTest, FixedPoints) {
  const MechanismTable rr = testing::Rr3();
  const MechanismTable same = EnforceAnadromic(rr);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(same.probs(i)[j], rr.probs(i)[j], 1e-15);
    }
  }
  const MechanismTable& d = Designed(4, 4, 1.0);
  const MechanismTable again = EnforceAnadromic(d);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(again.probs(i)[j], d.probs(i)[j], 1e-15);
    }
  }
}

TEST(AnadromicTest, AsymmetricAlphabetIsASymmetryError) {
  // Rows (0.8, 0.2) / (0.25, 0.75) are unbiased only for an alphabet that
  // is not symmetric about 1/2, so the averaged rows lose unbiasedness.
  const double a2 = 1.0 / (0.75 - 0.0625);
  const MechanismTable t = MechanismTable::Create(
      {-a2 / 4, a2},
      {{std::log(0.8), std::log(0.2)}, {std::log(0.25), std::log(0.75)}},
      1.33);
  try {
    EnforceAnadromic(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSymmetry);
    EXPECT_NE(std::string(e.what()).find("unbiasedness"), std::string::npos);
  }
}

TEST(ValidateTest, NamesTheFailedCheck) {
  RawTable raw = Designed(4, 4, 1.0).ToRaw();
  EXPECT_TRUE(ValidateTable(raw, 1e-6).passed());

  RawTable neg = raw;
  neg.probs[2][1] = -neg.probs[2][1];
  const ValidationReport r1 = ValidateTable(neg, 1e-6);
  EXPECT_FALSE(r1.Find("simplex")->passed);
  EXPECT_EQ(r1.Find("simplex")->detail, "row 2");

  RawTable shifted = raw;
  for (double& a : shifted.alphabet) a += 0.1;
  const ValidationReport r2 = ValidateTable(shifted, 1e-6);
  EXPECT_FALSE(r2.Find("unbiasedness")->passed);
  EXPECT_TRUE(r2.Find("simplex")->passed);

  RawTable skewed = raw;
  skewed.grid[1] += 0.01;
  EXPECT_FALSE(ValidateTable(skewed, 1e-6).Find("grid_uniformity")->passed);
}

}  // namespace
}  // namespace imvu
