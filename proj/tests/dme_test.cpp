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

#include "imvu/dme.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_tables.hpp"

namespace imvu {
namespace {

using testing::Designed;

std::vector<MechanismTable> FigureTwoTables() {
  return {Designed(2, 8, 5.0), Designed(4, 8, 5.0), Designed(8, 8, 5.0)};
}

TEST(SweepTest, FigureTwoShape) {
  const SweepReport r = SweepBiasVariance(FigureTwoTables(), SweepGrid(), 5.0);
  EXPECT_EQ(r.rows.size(), 3u * 2u * 201u);
  EXPECT_DOUBLE_EQ(r.laplace_variance, 0.08);
  for (const auto& row : r.rows) EXPECT_EQ(row.bias, row.mean - row.x);
  for (int b_in : {2, 4, 8}) EXPECT_LE(r.MaxAbsBias("mvu", b_in), 1e-6);
  EXPECT_GT(r.MaxAbsBias("imvu", 2), r.MaxAbsBias("imvu", 4));
  EXPECT_GT(r.MaxAbsBias("imvu", 4), r.MaxAbsBias("imvu", 8));
  const auto [lo, hi] = r.VarianceRange("imvu", 8);
  EXPECT_GE(lo, 0.04);
  EXPECT_LE(hi, 0.16);
}

TEST(SweepTest, CsvLayout) {
  const SweepReport r =
      SweepBiasVariance({Designed(2, 8, 5.0)}, SweepGrid(3), 5.0);
  const std::string csv = r.ToCsv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "mechanism,b_in,x,mean,bias,variance,laplace_ref");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(SweepTest, RejectsMismatchedTables) {
  EXPECT_THROW(SweepBiasVariance({Designed(2, 8, 5.0), Designed(2, 4, 5.0)},
                                 SweepGrid(), 5.0),
               Error);
  EXPECT_THROW(SweepBiasVariance({Designed(2, 8, 1.0)}, SweepGrid(), 5.0),
               Error);
}

TEST(DmeTest, IdentityIsExact) {
  DmeConfig cfg;
  Rng rng(1);
  const DmeResult r = DmeMse(50, 8, cfg, rng, 3);
  EXPECT_EQ(r.mse, 0.0);
  EXPECT_EQ(r.bits_per_coord, 32.0);
}

// Expected MSE of MVU dithering for iid uniform inputs on [-s, s]: each
// coordinate contributes (2C/beta)^2 E[Var(x)] / n.
double AnalyticMvuMse(const InterpolatedMechanism& m, double s, int d, int n) {
  const int grid = 20001;
  double mean_var = 0.0;
  for (int k = 0; k < grid; ++k) {
    const double u = -s + 2 * s * k / (grid - 1);
    const double x = ScaleInput(u, m.clip().clip_c, m.beta());
    mean_var += MomentsOf(m.table().alphabet(), MvuDitherPmf(m.table(), x))
                    .variance;
  }
  mean_var /= grid;
  const double f = 2 * m.clip().clip_c / m.beta();
  return d * f * f * mean_var / n;
}

TEST(DmeTest, UnbiasedMseScalesAsOneOverN) {
  DmeConfig cfg;
  cfg.mechanism = DmeMechanism::kMvu;
  cfg.input_scale = 0.1;
  cfg.mech.emplace(Designed(4, 4, 2.0), 1.0, ClipConfig{Norm::kL2, 1.0});
  const int d = 16;
  for (int n : {10, 100, 1000}) {
    Rng rng(100 + n);
    const DmeResult r = DmeMse(n, d, cfg, rng, 200);
    const double expected = AnalyticMvuMse(*cfg.mech, 0.1, d, n);
    EXPECT_LE(std::abs(r.mse - expected), 0.2 * expected) << n;
  }
}

TEST(DmeTest, WireCost) {
  DmeConfig cfg;
  cfg.mechanism = DmeMechanism::kImvu;
  cfg.mech.emplace(testing::Rr3(), 1.0, ClipConfig{Norm::kL2, 1.0});
  Rng rng(2);
  EXPECT_EQ(DmeMse(5, 4, cfg, rng, 1).bits_per_coord, 1.0);
  cfg.mech.emplace(Designed(2, 8, 1.0), 1.0, ClipConfig{Norm::kL2, 1.0});
  EXPECT_EQ(DmeMse(5, 4, cfg, rng, 1).bits_per_coord, 3.0);
  DmeConfig sign;
  sign.mechanism = DmeMechanism::kSignSgd;
  sign.baseline.kind = BaselineKind::kSignSgd;
  EXPECT_EQ(DmeMse(5, 4, sign, rng, 1).bits_per_coord, 1.0);
}

TEST(DmeTest, TableMechanismNeedsTable) {
  DmeConfig cfg;
  cfg.mechanism = DmeMechanism::kImvu;
  Rng rng(3);
  EXPECT_THROW(DmeMse(5, 4, cfg, rng, 1), Error);
  EXPECT_THROW(DmeMse(0, 4, DmeConfig{}, rng, 1), Error);
}

TEST(DmeTest, ParsesNames) {
  for (auto m : {DmeMechanism::kIdentity, DmeMechanism::kImvu,
                 DmeMechanism::kMvu, DmeMechanism::kLaplace,
                 DmeMechanism::kGaussian, DmeMechanism::kSignSgd}) {
    EXPECT_EQ(ParseDmeMechanism(DmeMechanismName(m)), m);
  }
  EXPECT_THROW(ParseDmeMechanism("skellam"), Error);
}

}  // namespace
}  // namespace imvu
