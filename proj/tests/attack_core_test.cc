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


#include "ldpstream/attack_core.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>
#include "brute_force.hpp"

namespace ldpstream {
namespace {

using testing::for_each_allocation;
using testing::ipma_continuous_optimum;
using testing::opma_continuous_optimum;

const double kLn3 = std::log(3.0);

FrequencyVector random_simplex(std::size_t d, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  FrequencyVector f(d);
  double s = 0.0;
  for (auto& v : f) s += (v = e(rng));
  for (auto& v : f) v /= s;
  return f;
}

TEST(ProjectionTest, StaysFeasible) {
  Rng rng(1);
  std::normal_distribution<double> g(0.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> c(5);
    for (auto& v : c) v = g(rng);
    const double total = 7.0;
    const auto x = project_capped_simplex(c, total, total);
    EXPECT_NEAR(std::accumulate(x.begin(), x.end(), 0.0), total, 1e-9);
    for (double v : x) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, total);
    }
  }
}

TEST(IpmaTest, SufficientExample) {
  const Knowledge kn{100, {0.5, 0.5}};
  const FrequencyVector target = {0.75, 0.25};
  const auto a = ipma_solve(kn, target, 100);
  EXPECT_EQ(a.counts, (std::vector<double>{100, 0}));
  EXPECT_NEAR(ipma_objective(kn, target, a.counts, 100), 0.0, 1e-15);
}

TEST(IpmaTest, InsufficientExample) {
  const Knowledge kn{100, {0.5, 0.5}};
  const FrequencyVector target = {0.75, 0.25};
  const auto a = ipma_solve(kn, target, 20);
  EXPECT_EQ(a.counts, (std::vector<double>{20, 0}));
  // Brute force over m[0] in 0..20.
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 20; ++k) {
    const std::vector<double> x = {double(k), double(20 - k)};
    best = std::min(best, ipma_objective(kn, target, x, 20));
  }
  EXPECT_NEAR(ipma_objective(kn, target, a.counts, 20), best, 1e-15);
  EXPECT_NEAR(best, 0.0277778, 1e-7);
}

TEST(IpmaTest, IdentityNeedsNoFakeMass) {
  const Knowledge kn{100, {0.2, 0.8}};
  const auto a = ipma_solve(kn, kn.f_e, 0);
  EXPECT_EQ(a.counts, (std::vector<double>{0, 0}));
  EXPECT_DOUBLE_EQ(ipma_objective(kn, kn.f_e, a.counts, 0), 0.0);
}

TEST(IpmaTest, MatchesBruteForce) {
  Rng rng(2);
  std::uniform_int_distribution<int> dd(2, 4), mm(0, 12), nn(5, 40);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t d = static_cast<std::size_t>(dd(rng));
    const std::int64_t m = mm(rng);
    const Knowledge kn{static_cast<double>(nn(rng)), random_simplex(d, rng)};
    const auto target = random_simplex(d, rng);
    const auto x = ipma_solve_continuous(kn, target, static_cast<double>(m));
    EXPECT_NEAR(ipma_objective(kn, target, x, static_cast<double>(m)),
                ipma_continuous_optimum(kn, target, static_cast<double>(m)),
                1e-9);
    double int_best = std::numeric_limits<double>::infinity();
    for_each_allocation(d, m, m, [&](const std::vector<double>& a) {
      int_best = std::min(int_best, ipma_objective(kn, target, a, double(m)));
    });
    const auto r = ipma_solve(kn, target, m);
    EXPECT_NEAR(std::accumulate(r.counts.begin(), r.counts.end(), 0.0),
                double(m), 1e-12);
    const double slack = static_cast<double>(d) /
                         ((kn.n_e + double(m)) * (kn.n_e + double(m)));
    EXPECT_LE(ipma_objective(kn, target, r.counts, double(m)),
              int_best + slack);
  }
}

TEST(IpmaTest, GapAtSufficiency) {
  const FrequencyVector f = {0.5, 0.5};
  const FrequencyVector target = {0.75, 0.25};
  const auto a = ipma_solve({100, f}, target, 100);
  const auto g = ipma_gap(a, 100, f, target, FoKind::kKrr, kLn3, 100);
  EXPECT_NEAR(g.bias, 0.0, 1e-15);
  EXPECT_NEAR(g.value(), fo_variance(FoKind::kKrr, 200, kLn3, 2), 1e-15);
  EXPECT_NEAR(g.value(), 0.00375, 1e-15);
}

TEST(IpmaTest, SufficientM) {
  const FrequencyVector f = {0.5, 0.5};
  EXPECT_EQ(ipma_sufficient_m(100, f, FrequencyVector{0.75, 0.25}), 100);
  EXPECT_EQ(ipma_sufficient_m(100, f, f), 0);
  EXPECT_TRUE(std::isinf(ipma_sufficient_m(100, f, FrequencyVector{1, 0})));
}

TEST(IpmaTest, SufficiencyZeroesBias) {
  Rng rng(3);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t d = 2 + inst % 4;
    const double n = 1000;
    const auto f = random_simplex(d, rng);
    auto target = random_simplex(d, rng);
    const double m = ipma_sufficient_m(n, f, target);
    ASSERT_TRUE(std::isfinite(m));
    const auto x = ipma_solve_continuous({n, f}, target, m);
    EXPECT_NEAR(ipma_objective({n, f}, target, x, m), 0.0, 1e-9);
  }
}

TEST(IpmaTest, GapMonotoneInBudgetAndScale) {
  Rng rng(4);
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t d = 2 + inst % 3;
    const auto f = random_simplex(d, rng);
    const auto target = random_simplex(d, rng);
    const double n = 500;
    const double m = 50;
    auto gap = [&](double mm, double nn, double eps) {
      const auto x = ipma_solve_continuous({nn, f}, target, mm);
      return ipma_gap(x, nn, f, target, FoKind::kAda, eps, mm).value();
    };
    EXPECT_GE(gap(m, n, 0.5), gap(m, n, 1.0));
    EXPECT_GE(gap(m, n, 1.0), gap(m, n, 2.0));
    for (double alpha : {2.0, 4.0}) {
      EXPECT_GT(gap(m, n, 1.0), gap(alpha * m, alpha * n, 1.0));
    }
  }
}

TEST(OpmaTest, KrrExample) {
  const FoParams p = fo_params(FoKind::kKrr, kLn3, 2);
  const Knowledge kn{100, {0.5, 0.5}};
  const FrequencyVector target = {0.75, 0.25};
  const auto a = opma_solve(kn, target, 100, p);
  EXPECT_EQ(a.mode, AllocationMode::kOutputKrr);
  EXPECT_EQ(a.counts, (std::vector<double>{75, 25}));
  EXPECT_NEAR(opma_objective(kn, target, a.counts, 100, p), 0.0, 1e-12);
}

TEST(OpmaTest, OueSufficientReachesZero) {
  Rng rng(5);
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t d = 2 + inst % 5;
    const FoParams p = fo_params(FoKind::kOue, 1.0, d);
    const auto f = random_simplex(d, rng);
    const auto target = random_simplex(d, rng);
    const double m = opma_sufficient_m(1000, f, target, p);
    ASSERT_TRUE(std::isfinite(m));
    const auto x = opma_solve_continuous({1000, f}, target, m, p);
    EXPECT_NEAR(opma_objective({1000, f}, target, x, m, p), 0.0, 1e-9);
    const auto g = opma_gap(x, 1000, f, target, p, m);
    EXPECT_NEAR(g.bias, 0.0, 1e-18);
    const double ratio = 1000 / (1000 + m);
    EXPECT_NEAR(g.value(),
                ratio * ratio * fo_variance(FoKind::kOue, 1000, 1.0, d), 1e-15);
  }
}

TEST(OpmaTest, MatchesBruteForce) {
  Rng rng(6);
  std::uniform_int_distribution<int> dd(2, 4), mm(0, 12), nn(5, 40);
  for (FoKind kind : {FoKind::kKrr, FoKind::kOue}) {
    for (int inst = 0; inst < 100; ++inst) {
      const std::size_t d = static_cast<std::size_t>(dd(rng));
      const std::int64_t m = mm(rng);
      const FoParams p = fo_params(kind, 0.5 + inst % 4 * 0.5, d);
      const Knowledge kn{static_cast<double>(nn(rng)), random_simplex(d, rng)};
      const auto target = random_simplex(d, rng);
      const double md = static_cast<double>(m);
      const auto x = opma_solve_continuous(kn, target, md, p);
      EXPECT_NEAR(opma_objective(kn, target, x, md, p),
                  opma_continuous_optimum(kn, target, md, p), 1e-9);
      if (kind == FoKind::kKrr) {
        double int_best = std::numeric_limits<double>::infinity();
        for_each_allocation(d, m, m, [&](const std::vector<double>& a) {
          int_best = std::min(int_best, opma_objective(kn, target, a, md, p));
        });
        const auto r = opma_solve(kn, target, m, p);
        // Rounding moves each coordinate by less than one report.
        EXPECT_LE(opma_objective(kn, target, r.counts, md, p),
                  int_best + static_cast<double>(d));
      }
    }
  }
}

TEST(OpmaTest, SufficientMExample) {
  const FoParams p = fo_params(FoKind::kKrr, kLn3, 2);
  const FrequencyVector f = {0.5, 0.5};
  const FrequencyVector target = {0.75, 0.25};
  EXPECT_EQ(opma_sufficient_m(100, f, target, p), 34);
  // Feasibility search: smallest m whose ideal counts fit the box.
  int first = -1;
  for (int m = 0; m <= 200 && first < 0; ++m) {
    const auto a = opma_ideal_counts({100, f}, target, m, p);
    bool ok = true;
    for (double v : a) ok = ok && v >= -1e-9 && v <= m + 1e-9;
    if (ok) first = m;
  }
  EXPECT_EQ(first, 34);
  EXPECT_EQ(opma_sufficient_m(100, f, f, p), 0);
}

TEST(OpmaTest, NeedsFewerFakeUsersThanInput) {
  Rng rng(7);
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t d = 2 + inst % 6;
    const auto f = random_simplex(d, rng);
    const auto target = random_simplex(d, rng);
    for (FoKind kind : {FoKind::kKrr, FoKind::kOue}) {
      const FoParams p = fo_params(kind, 1.0, d);
      EXPECT_LE(opma_sufficient_m(1000, f, target, p),
                ipma_sufficient_m(1000, f, target));
    }
  }
}

TEST(OpmaTest, OutputBeatsInputAtSufficiency) {
  const double n = 1000;
  const double m = 300;
  for (double eps : {0.5, 1.0, 2.0}) {
    const double gi = fo_variance(FoKind::kKrr, n + m, eps, 4);
    const double go =
        (n / (n + m)) * (n / (n + m)) * fo_variance(FoKind::kKrr, n, eps, 4);
    EXPECT_NEAR(go, n / (n + m) * gi, 1e-15);
    EXPECT_LT(go, gi);
  }
}

TEST(OpmaTest, GapStrictlyDecreasesUnderScaling) {
  Rng rng(8);
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t d = 2 + inst % 3;
    const FoParams p = fo_params(FoKind::kAda, 1.0, d);
    const auto f = random_simplex(d, rng);
    const auto target = random_simplex(d, rng);
    auto gap = [&](double mm, double nn) {
      const auto x = opma_solve_continuous({nn, f}, target, mm, p);
      return opma_gap(x, nn, f, target, p, mm).value();
    };
    for (double alpha : {2.0, 4.0}) {
      EXPECT_GT(gap(40, 400), gap(alpha * 40, alpha * 400));
    }
  }
}

TEST(DmaTest, IdmaMaximizeExample) {
  const Knowledge kn{90, {0.5, 0.3, 0.2}};
  const FrequencyVector last = {0.2, 0.3, 0.5};
  const auto a = idma_extreme(kn, last, 10, Direction::kMaximize);
  EXPECT_EQ(a.counts, (std::vector<double>{10, 0, 0}));
  double best = -1;
  std::vector<double> arg;
  for_each_allocation(3, 10, 10, [&](const std::vector<double>& x) {
    const double v = idma_objective(kn, last, x, 10);
    if (v > best) {
      best = v;
      arg = x;
    }
  });
  EXPECT_EQ(arg, a.counts);
}

TEST(DmaTest, MaximizeTieGoesToLowestIndex) {
  const Knowledge kn{10, {0.5, 0.5}};
  const auto a = idma_extreme(kn, FrequencyVector{0.5, 0.5}, 4,
                              Direction::kMaximize);
  EXPECT_EQ(a.counts, (std::vector<double>{4, 0}));
  const FoParams p = fo_params(FoKind::kKrr, 1.0, 3);
  const auto b = odma_extreme(kn, FrequencyVector{0.2, 0.2, 0.6}, 4,
                              Direction::kMaximize, p);
  EXPECT_EQ(b.counts, (std::vector<double>{4, 0, 0}));
}

TEST(DmaTest, MinimizeAtMixtureIsEmpty) {
  const Knowledge kn{100, {0.3, 0.7}};
  const auto a = idma_extreme(kn, kn.f_e, 0, Direction::kMinimize);
  EXPECT_EQ(a.counts, (std::vector<double>{0, 0}));
}

TEST(DmaTest, OdmaMaximizeSupportsRarestItem) {
  const Knowledge kn{100, {0.3, 0.3, 0.4}};
  const FrequencyVector last = {0.1, 0.3, 0.6};
  const auto k = odma_extreme(kn, last, 7, Direction::kMaximize,
                              fo_params(FoKind::kKrr, 1.0, 3));
  EXPECT_EQ(k.counts, (std::vector<double>{7, 0, 0}));
  Rng rng(9);
  const auto oue = odma_extreme(kn, last, 7, Direction::kMaximize,
                                fo_params(FoKind::kOue, 1.0, 3));
  for (const auto& r : allocation_to_reports(oue, fo_params(FoKind::kOue, 1.0, 3), rng)) {
    EXPECT_EQ(r.bits, (std::vector<std::uint8_t>{1, 0, 0}));
  }
}

TEST(DmaTest, MaximizeOptimalByBruteForce) {
  Rng rng(10);
  for (int seed = 0; seed < 50; ++seed) {
    for (std::int64_t m = 1; m <= 5; ++m) {
      const Knowledge kn{20, random_simplex(3, rng)};
      const auto last = random_simplex(3, rng);
      const double md = static_cast<double>(m);
      double best = -std::numeric_limits<double>::infinity();
      for_each_allocation(3, m, m, [&](const std::vector<double>& x) {
        best = std::max(best, idma_objective(kn, last, x, md));
      });
      const auto a = idma_extreme(kn, last, m, Direction::kMaximize);
      EXPECT_NEAR(idma_objective(kn, last, a.counts, md), best, 1e-12);
      for (FoKind kind : {FoKind::kKrr, FoKind::kOue}) {
        const FoParams p = fo_params(kind, 1.0, 3);
        // Every fake user reports, so OUE allocations carry m supports.
        double obest = -std::numeric_limits<double>::infinity();
        for_each_allocation(3, m, m, [&](const std::vector<double>& x) {
          obest = std::max(obest,
                           odma_lower_bound_objective(last, x, md, kn.n_e, p));
        });
        const auto o = odma_extreme(kn, last, m, Direction::kMaximize, p);
        EXPECT_NEAR(odma_lower_bound_objective(last, o.counts, md, kn.n_e, p),
                    obest, 1e-12);
      }
    }
  }
}

// Characterization: without a mass constraint the OUE lower bound is
// maximized by fake reports with no bits set.
TEST(DmaTest, OueLowerBoundPrefersEmptyReports) {
  const FoParams p = fo_params(FoKind::kOue, 1.0, 3);
  const FrequencyVector last = {0.2, 0.3, 0.5};
  const std::vector<double> empty = {0, 0, 0};
  const auto o = odma_extreme({50, last}, last, 5, Direction::kMaximize, p);
  EXPECT_GT(odma_lower_bound_objective(last, empty, 5, 50, p),
            odma_lower_bound_objective(last, o.counts, 5, 50, p));
}

TEST(OpmaTest, UniformTargetSpreadsEvenly) {
  const FoParams p = fo_params(FoKind::kKrr, 1.0, 4);
  const FrequencyVector f = {0.25, 0.25, 0.25, 0.25};
  const auto x = opma_solve_continuous({1000, f}, f, 40, p);
  for (double v : x) EXPECT_NEAR(v, 10.0, 1e-9);
}

TEST(MsdTest, Choice) {
  EXPECT_EQ(msd_choose(0.02, 0.01), Strategy::kPublication);
  EXPECT_EQ(msd_choose(0.005, 0.01), Strategy::kApproximation);
  EXPECT_EQ(msd_choose(1e9, kInfinity), Strategy::kApproximation);
}

TEST(AllocationTest, ReportsMaterialize) {
  Rng rng(11);
  const FoParams big = fo_params(FoKind::kKrr, 40.0, 2);
  FakeAllocation in{{100, 0}, 100, AllocationMode::kInput};
  const auto f = fo_aggregate(big, allocation_to_reports(in, big, rng));
  EXPECT_NEAR(f[0], 1.0, 1e-9);
  EXPECT_NEAR(f[1], 0.0, 1e-9);

  const FoParams krr = fo_params(FoKind::kKrr, 1.0, 2);
  FakeAllocation out{{75, 25}, 100, AllocationMode::kOutputKrr};
  const auto reps = allocation_to_reports(out, krr, rng);
  EXPECT_EQ(fo_support_counts(krr, reps), (std::vector<double>{75, 25}));

  const FoParams oue = fo_params(FoKind::kOue, 1.0, 2);
  FakeAllocation frac{{2.5, 2.5}, 5, AllocationMode::kOutputOue};
  EXPECT_EQ(oue_column_sums(frac), (std::vector<std::int64_t>{3, 2}));
  const auto bits = allocation_to_reports(frac, oue, rng);
  EXPECT_EQ(bits.size(), 5u);
  EXPECT_EQ(fo_support_counts(oue, bits), (std::vector<double>{3, 2}));
}

TEST(AllocationTest, ValidationRejectsBadMass) {
  Rng rng(12);
  const FoParams krr = fo_params(FoKind::kKrr, 1.0, 2);
  FakeAllocation bad{{3, 3}, 5, AllocationMode::kOutputKrr};
  EXPECT_THROW(allocation_to_reports(bad, krr, rng), InvalidAllocationError);
  FakeAllocation neg{{-1, 6}, 5, AllocationMode::kInput};
  EXPECT_THROW(allocation_to_reports(neg, krr, rng), InvalidAllocationError);
  const FoParams oue = fo_params(FoKind::kOue, 1.0, 2);
  EXPECT_THROW(allocation_to_reports(bad, oue, rng), InvalidAllocationError);
}

TEST(AllocationTest, SupportFastPathMatchesReports) {
  const FoParams krr = fo_params(FoKind::kKrr, 1.0, 3);
  FakeAllocation out{{4, 0, 6}, 10, AllocationMode::kOutputKrr};
  Rng rng(13);
  EXPECT_EQ(allocation_to_support(out, krr, rng),
            fo_support_counts(krr, allocation_to_reports(out, krr, rng)));
}

}  // namespace
}  // namespace ldpstream
