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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ldpstream/common.hpp"
#include "ldpstream/freq_oracle.hpp"
#include "ldpstream/protocols.hpp"

namespace ldpstream {

enum class KnowledgeMode { kFull, kPartial, kMitm };

struct Knowledge {
  double n_e = 0.0;
  FrequencyVector f_e;
  KnowledgeMode mode = KnowledgeMode::kFull;
  double rho = 1.0;
};

enum class AllocationMode { kInput, kOutputKrr, kOutputOue };

struct FakeAllocation {
  std::vector<double> counts;
  double total = 0.0;
  AllocationMode mode = AllocationMode::kInput;
};

struct GapEstimate {
  double bias = 0.0;
  double variance = 0.0;
  double value() const { return bias + variance; }
};

enum class Direction { kMinimize, kMaximize };

inline AllocationMode output_mode(const FoParams& params) {
  return params.kind == FoKind::kKrr ? AllocationMode::kOutputKrr
                                     : AllocationMode::kOutputOue;
}

// Euclidean projection of c onto {x : sum x = total, 0 <= x <= upper}.
// x_k = clip(c_k - lambda, 0, upper), with lambda located by scanning the
// sorted breakpoints of the piecewise-linear mass function.
inline std::vector<double> project_capped_simplex(std::span<const double> c,
                                                  double total, double upper) {
  const std::size_t d = c.size();
  std::vector<double> x(d, 0.0);
  if (d == 0 || total <= 0.0) return x;
  if (total >= upper * static_cast<double>(d)) {
    std::fill(x.begin(), x.end(), upper);
    return x;
  }
  auto mass = [&](double lambda) {
    double s = 0.0;
    for (double ck : c) s += std::clamp(ck - lambda, 0.0, upper);
    return s;
  };
  std::vector<double> bp;
  bp.reserve(2 * d);
  for (double ck : c) {
    bp.push_back(ck);
    bp.push_back(ck - upper);
  }
  std::sort(bp.begin(), bp.end());
  // mass(bp.front()) = d * upper > total and mass(bp.back()) = 0 < total.
  double lo = bp.front();
  double mass_lo = mass(lo);
  double lambda = bp.back();
  for (std::size_t i = 1; i < bp.size(); ++i) {
    const double hi = bp[i];
    const double mass_hi = mass(hi);
    if (mass_hi <= total) {
      lambda = mass_lo == mass_hi
                   ? hi
                   : lo + (mass_lo - total) * (hi - lo) / (mass_lo - mass_hi);
      break;
    }
    lo = hi;
    mass_lo = mass_hi;
  }
  for (std::size_t k = 0; k < d; ++k) {
    x[k] = std::clamp(c[k] - lambda, 0.0, upper);
  }
  return x;
}

inline std::vector<double> ipma_target_counts(const Knowledge& kn,
                                              std::span<const double> target,
                                              double m) {
  check_same_size(kn.f_e.size(), target.size(), "ipma");
  std::vector<double> c(target.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    c[k] = (m + kn.n_e) * target[k] - kn.n_e * kn.f_e[k];
  }
  return c;
}

inline double ipma_objective(const Knowledge& kn,
                             std::span<const double> target,
                             std::span<const double> counts, double m) {
  check_same_size(counts.size(), target.size(), "ipma_objective");
  const double denom = kn.n_e + m;
  if (!(denom > 0.0)) return mean_squared_distance(kn.f_e, target);
  double s = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double e = (counts[k] + kn.n_e * kn.f_e[k]) / denom - target[k];
    s += e * e;
  }
  return s / static_cast<double>(target.size());
}

// Continuous minimizer of the input-poisoning objective (pre-rounding).
inline std::vector<double> ipma_solve_continuous(const Knowledge& kn,
                                                 std::span<const double> target,
                                                 double m) {
  if (m < 0.0) throw InvalidConfigError("m must be non-negative");
  return project_capped_simplex(ipma_target_counts(kn, target, m), m, m);
}

inline FakeAllocation ipma_solve(const Knowledge& kn,
                                 std::span<const double> target,
                                 std::int64_t m) {
  const auto x = ipma_solve_continuous(kn, target, static_cast<double>(m));
  const auto r = largest_remainder_round(x, m);
  FakeAllocation a;
  a.counts.assign(r.begin(), r.end());
  a.total = static_cast<double>(m);
  a.mode = AllocationMode::kInput;
  return a;
}

inline GapEstimate ipma_gap(std::span<const double> counts, double n,
                            std::span<const double> f_true,
                            std::span<const double> target, FoKind kind,
                            double epsilon, double m) {
  Knowledge exact{n, FrequencyVector(f_true.begin(), f_true.end())};
  GapEstimate g;
  g.bias = ipma_objective(exact, target, counts, m);
  g.variance = fo_variance(kind, n + m, epsilon, target.size());
  return g;
}

inline GapEstimate ipma_gap(const FakeAllocation& alloc, double n,
                            std::span<const double> f_true,
                            std::span<const double> target, FoKind kind,
                            double epsilon, double m) {
  return ipma_gap(alloc.counts, n, f_true, target, kind, epsilon, m);
}

// Smallest m for which the target is exactly reachable (infinity when a
// target entry is 0 but the genuine frequency is not).
inline double ipma_sufficient_m(double n, std::span<const double> f_true,
                                std::span<const double> target) {
  check_same_size(f_true.size(), target.size(), "ipma_sufficient_m");
  double best = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double f = f_true[k];
    const double ft = target[k];
    if (ft <= 0.0) {
      if (f > 0.0) return kInfinity;
    } else {
      best = std::max(best, n * f / ft - n);
    }
    if (ft >= 1.0) {
      if (f < 1.0) return kInfinity;
    } else {
      best = std::max(best, (n * ft - n * f) / (1.0 - ft));
    }
  }
  return std::max(0.0, std::ceil(best - 1e-9));
}

// Ideal fake support counts a_k = -C_k; the L1 objective is sum |x_k - a_k|.
inline std::vector<double> opma_ideal_counts(const Knowledge& kn,
                                             std::span<const double> target,
                                             double m, const FoParams& params) {
  check_same_size(kn.f_e.size(), target.size(), "opma");
  check_same_size(params.d, target.size(), "opma");
  const double pq = params.p - params.q;
  std::vector<double> a(target.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = pq * ((m + kn.n_e) * target[k] - kn.n_e * kn.f_e[k]) + m * params.q;
  }
  return a;
}

inline double opma_objective(const Knowledge& kn,
                             std::span<const double> target,
                             std::span<const double> counts, double m,
                             const FoParams& params) {
  const auto a = opma_ideal_counts(kn, target, m, params);
  check_same_size(counts.size(), a.size(), "opma_objective");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(counts[k] - a[k]);
  return s;
}

// Continuous minimizer of the L1 program. The clipped closed form is optimal
// without the kRR sum constraint. With it, every feasible repair moves mass
// in one direction at unit cost, so all repairs tie on L1; the projection is
// one of them and also has the smallest squared deviation.
inline std::vector<double> opma_solve_continuous(const Knowledge& kn,
                                                 std::span<const double> target,
                                                 double m,
                                                 const FoParams& params) {
  if (m < 0.0) throw InvalidConfigError("m must be non-negative");
  const auto a = opma_ideal_counts(kn, target, m, params);
  if (params.kind == FoKind::kKrr) return project_capped_simplex(a, m, m);
  std::vector<double> x(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) x[k] = std::clamp(a[k], 0.0, m);
  return x;
}

inline FakeAllocation opma_solve(const Knowledge& kn,
                                 std::span<const double> target, std::int64_t m,
                                 const FoParams& params) {
  const auto x =
      opma_solve_continuous(kn, target, static_cast<double>(m), params);
  FakeAllocation a;
  a.total = static_cast<double>(m);
  a.mode = output_mode(params);
  if (params.kind == FoKind::kKrr) {
    const auto r = largest_remainder_round(x, m);
    a.counts.assign(r.begin(), r.end());
  } else {
    a.counts = x;
  }
  return a;
}

inline GapEstimate opma_gap(std::span<const double> counts, double n,
                            std::span<const double> f_true,
                            std::span<const double> target,
                            const FoParams& params, double m) {
  check_same_size(counts.size(), target.size(), "opma_gap");
  const double pq = params.p - params.q;
  const double big_n = m + n;
  GapEstimate g;
  double s = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double e =
        (n * f_true[k] * pq + counts[k] - m * params.q) / (big_n * pq) -
        target[k];
    s += e * e;
  }
  g.bias = s / static_cast<double>(target.size());
  g.variance = n * n * fo_variance(params.kind, n, params.epsilon, params.d) /
               (big_n * big_n);
  return g;
}

inline GapEstimate opma_gap(const FakeAllocation& alloc, double n,
                            std::span<const double> f_true,
                            std::span<const double> target,
                            const FoParams& params, double m) {
  return opma_gap(alloc.counts, n, f_true, target, params, m);
}

inline double opma_sufficient_m(double n, std::span<const double> f_true,
                                std::span<const double> target,
                                const FoParams& params) {
  check_same_size(f_true.size(), target.size(), "opma_sufficient_m");
  const double pq = params.p - params.q;
  double best = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double up = (1.0 - params.q) / pq - target[k];
    const double down = params.q / pq + target[k];
    const double need_up = n * target[k] - n * f_true[k];
    const double need_down = n * f_true[k] - n * target[k];
    if (up <= 0.0) {
      if (need_up > 0.0) return kInfinity;
    } else {
      best = std::max(best, need_up / up);
    }
    if (down <= 0.0) {
      if (need_down > 0.0) return kInfinity;
    } else {
      best = std::max(best, need_down / down);
    }
  }
  return std::max(0.0, std::ceil(best - 1e-9));
}

// Dissimilarity objective an input-poisoning attacker steers.
inline double idma_objective(const Knowledge& kn,
                             std::span<const double> f_last,
                             std::span<const double> counts, double m) {
  return ipma_objective(kn, f_last, counts, m);
}

// Allocation-dependent part of the lower bound on the output-poisoned
// dissimilarity: sum_k coef_k * m[k] / d.
inline double odma_lower_bound_objective(std::span<const double> f_last,
                                         std::span<const double> counts,
                                         double m, double n_e,
                                         const FoParams& params) {
  check_same_size(counts.size(), f_last.size(), "odma_objective");
  const double pq = params.p - params.q;
  const double big_n = m + n_e;
  double s = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double coef = (-2.0 * f_last[k] * big_n * pq - 2.0 * big_n * params.q) /
                        (pq * pq * big_n * big_n);
    s += coef * counts[k];
  }
  return s / static_cast<double>(counts.size());
}

inline FakeAllocation one_hot_allocation(std::size_t d, std::size_t k,
                                         std::int64_t m, AllocationMode mode) {
  FakeAllocation a;
  a.counts.assign(d, 0.0);
  a.counts[k] = static_cast<double>(m);
  a.total = static_cast<double>(m);
  a.mode = mode;
  return a;
}

inline FakeAllocation idma_extreme(const Knowledge& kn,
                                   std::span<const double> f_last,
                                   std::int64_t m, Direction direction) {
  if (direction == Direction::kMinimize) return ipma_solve(kn, f_last, m);
  check_same_size(kn.f_e.size(), f_last.size(), "idma_extreme");
  const double denom = static_cast<double>(m) + kn.n_e;
  std::vector<double> b(f_last.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    b[k] = (denom > 0.0 ? kn.n_e * kn.f_e[k] / denom : 0.0) - f_last[k];
  }
  return one_hot_allocation(b.size(), argmax_index(b), m,
                            AllocationMode::kInput);
}

inline FakeAllocation odma_extreme(const Knowledge& kn,
                                   std::span<const double> f_last,
                                   std::int64_t m, Direction direction,
                                   const FoParams& params) {
  if (direction == Direction::kMinimize) {
    return opma_solve(kn, f_last, m, params);
  }
  return one_hot_allocation(f_last.size(), argmin_index(f_last), m,
                            output_mode(params));
}

inline Strategy msd_choose(double dis_attack, double potential_gap) {
  if (std::isinf(potential_gap)) return Strategy::kApproximation;
  return dis_attack > potential_gap ? Strategy::kPublication
                                    : Strategy::kApproximation;
}

inline void validate_allocation(const FakeAllocation& alloc, std::size_t d) {
  check_same_size(alloc.counts.size(), d, "allocation");
  double sum = 0.0;
  for (double c : alloc.counts) {
    if (c < -1e-9 || c > alloc.total + 1e-9) {
      throw InvalidAllocationError("allocation entry outside [0, m]");
    }
    sum += c;
  }
  if (alloc.mode != AllocationMode::kOutputOue) {
    for (double c : alloc.counts) {
      if (std::abs(c - std::round(c)) > 1e-9) {
        throw InvalidAllocationError("allocation must be integer-valued");
      }
    }
    if (std::abs(sum - alloc.total) > 1e-9) {
      throw InvalidAllocationError("allocation does not sum to m");
    }
  }
}

inline std::vector<std::int64_t> oue_column_sums(const FakeAllocation& alloc) {
  double sum = 0.0;
  for (double c : alloc.counts) sum += c;
  return largest_remainder_round(alloc.counts, std::llround(sum));
}

inline std::vector<FoReport> allocation_to_reports(const FakeAllocation& alloc,
                                                   const FoParams& params,
                                                   Rng& rng) {
  validate_allocation(alloc, params.d);
  const std::int64_t m = std::llround(alloc.total);
  std::vector<FoReport> out;
  out.reserve(static_cast<std::size_t>(m));
  switch (alloc.mode) {
    case AllocationMode::kInput:
      for (std::size_t k = 0; k < params.d; ++k) {
        for (std::int64_t j = 0; j < std::llround(alloc.counts[k]); ++j) {
          out.push_back(fo_perturb(params, k, rng));
        }
      }
      break;
    case AllocationMode::kOutputKrr:
      if (params.kind != FoKind::kKrr) {
        throw InvalidAllocationError("kRR output allocation for OUE params");
      }
      for (std::size_t k = 0; k < params.d; ++k) {
        for (std::int64_t j = 0; j < std::llround(alloc.counts[k]); ++j) {
          FoReport r;
          r.item = k;
          out.push_back(r);
        }
      }
      break;
    case AllocationMode::kOutputOue: {
      if (params.kind != FoKind::kOue) {
        throw InvalidAllocationError("OUE output allocation for kRR params");
      }
      const auto cols = oue_column_sums(alloc);
      out.assign(static_cast<std::size_t>(m), FoReport{});
      for (auto& r : out) r.bits.assign(params.d, 0);
      for (std::size_t k = 0; k < params.d; ++k) {
        for (std::int64_t j = 0; j < std::min(cols[k], m); ++j) {
          out[static_cast<std::size_t>(j)].bits[k] = 1;
        }
      }
      break;
    }
  }
  return out;
}

// Support counts contributed by the fake users; same distribution as
// aggregating allocation_to_reports.
inline std::vector<double> allocation_to_support(const FakeAllocation& alloc,
                                                 const FoParams& params,
                                                 Rng& rng) {
  validate_allocation(alloc, params.d);
  switch (alloc.mode) {
    case AllocationMode::kInput: {
      std::vector<std::int64_t> counts(params.d);
      for (std::size_t k = 0; k < params.d; ++k) {
        counts[k] = std::llround(alloc.counts[k]);
      }
      return fo_perturb_counts(params, counts, rng);
    }
    case AllocationMode::kOutputKrr:
      if (params.kind != FoKind::kKrr) {
        throw InvalidAllocationError("kRR output allocation for OUE params");
      }
      return alloc.counts;
    case AllocationMode::kOutputOue: {
      if (params.kind != FoKind::kOue) {
        throw InvalidAllocationError("OUE output allocation for kRR params");
      }
      const auto cols = oue_column_sums(alloc);
      const std::int64_t m = std::llround(alloc.total);
      std::vector<double> s(params.d);
      for (std::size_t k = 0; k < params.d; ++k) {
        s[k] = static_cast<double>(std::min(cols[k], m));
      }
      return s;
    }
  }
  return {};
}

}  // namespace ldpstream
