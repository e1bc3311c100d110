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


#pragma once

#include <cmath>
#include <span>
#include <string>

#include "ldpstream/common.hpp"

namespace ldpstream {

enum class MeanKind { kSr, kPm, kHm };

struct MeanMechParams {
  MeanKind kind = MeanKind::kHm;
  double epsilon = 1.0;
  double lo = -1.0;
  double hi = 1.0;
};

// Below this budget the hybrid mechanism uses stochastic rounding only.
inline constexpr double kHmThreshold = 0.61;

// Output magnitude of stochastic rounding on [-1, 1].
inline double sr_bound(double epsilon) {
  const double e = std::exp(epsilon);
  return (e + 1.0) / (e - 1.0);
}

// Output half-width C of the piecewise mechanism on [-1, 1].
inline double pm_bound(double epsilon) {
  const double h = std::exp(epsilon / 2.0);
  return (h + 1.0) / (h - 1.0);
}

// Probability that the hybrid mechanism runs the piecewise branch.
inline double hm_pm_probability(double epsilon) {
  return epsilon > kHmThreshold ? 1.0 - std::exp(-epsilon / 2.0) : 0.0;
}

inline double sr_perturb(double epsilon, double v, Rng& rng) {
  const double s = sr_bound(epsilon);
  std::bernoulli_distribution up(0.5 + v / (2.0 * s));
  return up(rng) ? s : -s;
}

inline double pm_perturb(double epsilon, double v, Rng& rng) {
  const double h = std::exp(epsilon / 2.0);
  const double c = (h + 1.0) / (h - 1.0);
  const double l = (c + 1.0) / 2.0 * v - (c - 1.0) / 2.0;
  const double r = l + c - 1.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < h / (h + 1.0)) {
    return l + (r - l) * unit(rng);
  }
  const double left = l + c;
  const double right = c - r;
  const double u = unit(rng) * (left + right);
  return u < left ? -c + u : r + (u - left);
}

inline void validate_mean_params(const MeanMechParams& params) {
  if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) {
    throw InvalidConfigError("epsilon must be positive and finite");
  }
  if (!(params.hi > params.lo)) {
    throw InvalidConfigError("mean domain must have hi > lo");
  }
}

inline double mean_perturb(const MeanMechParams& params, double v, Rng& rng) {
  validate_mean_params(params);
  if (!(v >= params.lo && v <= params.hi)) {
    throw DomainError("value " + std::to_string(v) + " outside domain");
  }
  const double half = (params.hi - params.lo) / 2.0;
  const double mid = (params.hi + params.lo) / 2.0;
  const double x = (v - mid) / half;
  double y = 0.0;
  switch (params.kind) {
    case MeanKind::kSr:
      y = sr_perturb(params.epsilon, x, rng);
      break;
    case MeanKind::kPm:
      y = pm_perturb(params.epsilon, x, rng);
      break;
    case MeanKind::kHm: {
      std::bernoulli_distribution use_pm(hm_pm_probability(params.epsilon));
      y = use_pm(rng) ? pm_perturb(params.epsilon, x, rng)
                      : sr_perturb(params.epsilon, x, rng);
      break;
    }
  }
  return mid + half * y;
}

// The two-branch worst-case variance used as Var[y] in the streaming
// framework (n * Var(n, epsilon) for mean aggregation).
inline double hm_worst_variance(double epsilon) {
  const double e = std::exp(epsilon);
  const double sr = (e + 1.0) / (e - 1.0);
  if (epsilon <= kHmThreshold) return sr * sr;
  const double h = std::exp(epsilon / 2.0);
  return std::exp(-epsilon / 2.0) *
         (sr * sr + (h + 3.0) / (3.0 * (h - 1.0) * (h - 1.0)));
}

// Exact per-value output variances on [-1, 1].
inline double sr_variance(double epsilon, double v) {
  const double s = sr_bound(epsilon);
  return s * s - v * v;
}

inline double pm_variance(double epsilon, double v) {
  const double h = std::exp(epsilon / 2.0);
  return v * v / (h - 1.0) + (h + 3.0) / (3.0 * (h - 1.0) * (h - 1.0));
}

inline double hm_variance(double epsilon, double v) {
  const double a = hm_pm_probability(epsilon);
  return a * pm_variance(epsilon, v) + (1.0 - a) * sr_variance(epsilon, v);
}

inline double mean_aggregate(std::span<const double> reports) {
  if (reports.empty()) throw EmptyInputError("no mean reports to aggregate");
  double s = 0.0;
  for (double r : reports) s += r;
  return s / static_cast<double>(reports.size());
}

}  // namespace ldpstream
