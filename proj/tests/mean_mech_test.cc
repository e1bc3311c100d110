// Copyright 2026 The ldpstream Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "ldpstream/mean_mech.hpp"

#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

namespace ldpstream {
namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <class F>
Moments sample(F&& draw, int trials) {
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < trials; ++i) {
    const double y = draw();
    s += y;
    s2 += y * y;
  }
  Moments m;
  m.mean = s / trials;
  m.var = s2 / trials - m.mean * m.mean;
  return m;
}

TEST(MeanPerturbTest, ZeroIsUnbiased) {
  Rng rng(1);
  const MeanMechParams p{MeanKind::kHm, 1.0};
  const auto m = sample([&] { return mean_perturb(p, 0.0, rng); }, 1000000);
  EXPECT_NEAR(m.mean, 0.0, 0.01);
}

TEST(MeanPerturbTest, SmallBudgetUsesRoundingOnly) {
  Rng rng(2);
  const MeanMechParams p{MeanKind::kHm, 0.5};
  EXPECT_EQ(hm_pm_probability(0.5), 0.0);
  const double s = sr_bound(0.5);
  for (int i = 0; i < 10000; ++i) {
    const double y = mean_perturb(p, 0.4, rng);
    EXPECT_TRUE(y == s || y == -s);
  }
}

TEST(MeanPerturbTest, RoundingSupportAtLn3) {
  Rng rng(3);
  const double eps = std::log(3.0);
  EXPECT_NEAR(sr_bound(eps), 2.0, 1e-12);
  std::set<double> seen;
  double plus = 0.0;
  const int trials = 200000;
  for (int i = 0; i < trials; ++i) {
    const double y = sr_perturb(eps, 1.0, rng);
    seen.insert(y);
    if (y > 0) plus += 1.0;
  }
  EXPECT_EQ(seen.size(), 2u);
  EXPECT_NEAR(*seen.begin(), -2.0, 1e-12);
  EXPECT_NEAR(*seen.rbegin(), 2.0, 1e-12);
  // P(+2) = 3/4 gives mean 1.
  EXPECT_NEAR(plus / trials, 0.75, 0.004);
}

TEST(MeanPerturbTest, PiecewiseOutputsStayInRange) {
  Rng rng(4);
  for (double eps : {0.7, 2.0, 4.0}) {
    const double c = pm_bound(eps);
    for (double v : {-1.0, 0.0, 0.5, 1.0}) {
      for (int i = 0; i < 20000; ++i) {
        const double y = pm_perturb(eps, v, rng);
        EXPECT_GE(y, -c);
        EXPECT_LE(y, c);
      }
    }
  }
}

TEST(MeanPerturbTest, UnbiasedAndVarianceOnGrid) {
  Rng rng(5);
  const int trials = 100000;
  for (double eps : {0.3, 0.61, 1.0, 2.0, 4.0}) {
    for (double v : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
      const auto sr = sample([&] { return sr_perturb(eps, v, rng); }, trials);
      EXPECT_NEAR(sr.mean, v, 4 * std::sqrt(sr_variance(eps, v) / trials));
      EXPECT_NEAR(sr.var / sr_variance(eps, v), 1.0, 0.05);
      const auto pm = sample([&] { return pm_perturb(eps, v, rng); }, trials);
      EXPECT_NEAR(pm.mean, v, 4 * std::sqrt(pm_variance(eps, v) / trials));
      EXPECT_NEAR(pm.var / pm_variance(eps, v), 1.0, 0.05);
      const MeanMechParams p{MeanKind::kHm, eps};
      const auto hm = sample([&] { return mean_perturb(p, v, rng); }, trials);
      EXPECT_NEAR(hm.mean, v, 4 * std::sqrt(hm_variance(eps, v) / trials));
      EXPECT_NEAR(hm.var / hm_variance(eps, v), 1.0, 0.05);
    }
  }
}

TEST(MeanPerturbTest, AffineDomain) {
  Rng rng(6);
  const MeanMechParams p{MeanKind::kHm, 1.0, 0.0, 10.0};
  const auto m = sample([&] { return mean_perturb(p, 7.0, rng); }, 400000);
  EXPECT_NEAR(m.mean, 7.0, 0.05);
}

TEST(MeanPerturbTest, OutOfDomainThrows) {
  Rng rng(7);
  EXPECT_THROW(mean_perturb({MeanKind::kSr, 1.0}, 1.5, rng), DomainError);
  EXPECT_THROW(mean_perturb({MeanKind::kSr, 0.0}, 0.5, rng),
               InvalidConfigError);
}

TEST(HmWorstVarianceTest, BranchValues) {
  EXPECT_NEAR(hm_worst_variance(0.5), 16.6708, 1e-4);
  EXPECT_NEAR(hm_worst_variance(2.0), 0.8717, 1e-4);
}

// Worst case over v of the exact hybrid variance is attained at v = 0 or
// |v| = 1 since the variance is affine in v^2.
double exact_worst(double eps) {
  return std::max(hm_variance(eps, 0.0), hm_variance(eps, 1.0));
}

TEST(HmWorstVarianceTest, BoundsEmpiricalVarianceWhereFormulaHolds) {
  Rng rng(8);
  for (double eps : {0.3, 0.61, 0.8, 1.0}) {
    EXPECT_GE(hm_worst_variance(eps), exact_worst(eps) * (1 - 1e-12));
    const MeanMechParams p{MeanKind::kHm, eps};
    for (double v : {-1.0, 1.0}) {
      const auto m = sample([&] { return mean_perturb(p, v, rng); }, 100000);
      EXPECT_LE(m.var, hm_worst_variance(eps) * 1.1) << "eps=" << eps;
    }
  }
}

// Characterization: above roughly eps = 1.4 the pinned two-branch formula
// sits below the mechanism's true worst-case variance.
TEST(HmWorstVarianceTest, FormulaUnderestimatesAtLargeBudget) {
  for (double eps : {2.0, 3.0, 4.0}) {
    EXPECT_LT(hm_worst_variance(eps), exact_worst(eps));
  }
  EXPECT_NEAR(exact_worst(2.0), 1.04234, 1e-5);
}

TEST(MeanAggregateTest, Basics) {
  EXPECT_DOUBLE_EQ(mean_aggregate(std::vector<double>{1, 2, 3}), 2.0);
  EXPECT_DOUBLE_EQ(mean_aggregate(std::vector<double>(7, -0.25)), -0.25);
  EXPECT_THROW(mean_aggregate(std::vector<double>{}), EmptyInputError);
}

TEST(MeanAggregateTest, HybridReportsRecoverValue) {
  Rng rng(9);
  const MeanMechParams p{MeanKind::kHm, 1.0};
  std::vector<double> r(100000);
  for (auto& y : r) y = mean_perturb(p, 0.3, rng);
  EXPECT_NEAR(mean_aggregate(r), 0.3, 0.01);
}

}  // namespace
}  // namespace ldpstream
