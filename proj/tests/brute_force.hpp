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


// Exhaustive reference solvers shared by the unit and acceptance tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "ldpstream/attack_core.hpp"

namespace ldpstream::testing {

// Calls fn on every integer vector of length d with entries in [0, m] and
// (if `sum` >= 0) total `sum`.
inline void for_each_allocation(std::size_t d, std::int64_t m,
                                std::int64_t sum,
                                const std::function<void(const std::vector<double>&)>& fn) {
  std::vector<double> x(d, 0.0);
  std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t k,
                                                           std::int64_t used) {
    if (k == d) {
      if (sum < 0 || used == sum) fn(x);
      return;
    }
    const std::int64_t hi = sum < 0 ? m : std::min(m, sum - used);
    for (std::int64_t v = 0; v <= hi; ++v) {
      x[k] = static_cast<double>(v);
      rec(k + 1, used + v);
    }
  };
  rec(0, 0);
}

// Minimum of (1/d) sum_k ((x_k + n f_k)/(n + m) - t_k)^2 over the continuous
// box-simplex {sum x = m, 0 <= x <= m}, by enumerating which coordinates sit
// at 0, at m, or are free; the free ones share one multiplier.
inline double ipma_continuous_optimum(const Knowledge& kn,
                                      std::span<const double> target,
                                      double m) {
  const std::size_t d = target.size();
  const auto c = ipma_target_counts(kn, target, m);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> state(d, 0);
  std::vector<double> x(d);
  const std::size_t combos = static_cast<std::size_t>(std::pow(3, d));
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t rest = code;
    double fixed = 0.0;
    double free_c = 0.0;
    std::size_t n_free = 0;
    for (std::size_t k = 0; k < d; ++k) {
      state[k] = static_cast<int>(rest % 3);
      rest /= 3;
      if (state[k] == 1) fixed += m;
      if (state[k] == 2) {
        free_c += c[k];
        ++n_free;
      }
    }
    double lambda = 0.0;
    if (n_free == 0) {
      if (std::abs(fixed - m) > 1e-9) continue;
    } else {
      lambda = (free_c - (m - fixed)) / static_cast<double>(n_free);
    }
    bool ok = true;
    for (std::size_t k = 0; k < d && ok; ++k) {
      x[k] = state[k] == 0 ? 0.0 : state[k] == 1 ? m : c[k] - lambda;
      ok = x[k] >= -1e-9 && x[k] <= m + 1e-9;
    }
    if (ok) best = std::min(best, ipma_objective(kn, target, x, m));
  }
  return best;
}

// Minimum of the OPMA L1 objective over the continuous feasible set. The
// objective is piecewise linear, so an optimum sits where every coordinate
// but at most one is at 0, m or its breakpoint a_k; the sum constraint (kRR)
// pins the remaining one.
inline double opma_continuous_optimum(const Knowledge& kn,
                                      std::span<const double> target, double m,
                                      const FoParams& params) {
  const std::size_t d = target.size();
  const auto a = opma_ideal_counts(kn, target, m, params);
  const bool sum_fixed = params.kind == FoKind::kKrr;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> x(d);
  const std::size_t combos = static_cast<std::size_t>(std::pow(3, d));
  for (std::size_t free_k = 0; free_k <= d; ++free_k) {
    if (!sum_fixed && free_k < d) continue;
    for (std::size_t code = 0; code < combos; ++code) {
      std::size_t rest = code;
      double s = 0.0;
      bool ok = true;
      for (std::size_t k = 0; k < d; ++k) {
        const int st = static_cast<int>(rest % 3);
        rest /= 3;
        if (k == free_k) continue;
        x[k] = st == 0 ? 0.0 : st == 1 ? m : a[k];
        if (x[k] < -1e-12 || x[k] > m + 1e-12) ok = false;
        s += x[k];
      }
      if (!ok) continue;
      if (free_k < d) {
        x[free_k] = m - s;
        if (x[free_k] < -1e-9 || x[free_k] > m + 1e-9) continue;
      } else if (sum_fixed && std::abs(s - m) > 1e-9) {
        continue;
      }
      best = std::min(best, opma_objective(kn, target, x, m, params));
    }
  }
  return best;
}

}  // namespace ldpstream::testing
