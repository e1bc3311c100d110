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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ldpstream/common.hpp"

namespace ldpstream {

enum class FoKind { kKrr, kOue, kAda };

inline const char* to_string(FoKind k) {
  switch (k) {
    case FoKind::kKrr:
      return "kRR";
    case FoKind::kOue:
      return "OUE";
    case FoKind::kAda:
      return "Ada";
  }
  return "?";
}

struct FoParams {
  FoKind kind = FoKind::kKrr;  // never kAda once constructed
  double epsilon = 1.0;
  std::size_t d = 2;
  double p = 0.5;
  double q = 0.5;
};

// A kRR report carries `item`; an OUE report carries `bits` of length d.
struct FoReport {
  std::size_t item = 0;
  std::vector<std::uint8_t> bits;
};

inline void validate_fo_config(double epsilon, std::size_t d) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidConfigError("epsilon must be positive and finite");
  }
  if (d < 2) throw InvalidConfigError("domain size d must be at least 2");
}

inline double krr_variance(double n, double epsilon, std::size_t d) {
  const double e = std::exp(epsilon);
  const double dd = static_cast<double>(d);
  return (dd - 2.0 + e) / (n * (e - 1.0) * (e - 1.0)) +
         (dd - 2.0) / (n * dd * (e - 1.0));
}

inline double oue_variance(double n, double epsilon, std::size_t d) {
  const double e = std::exp(epsilon);
  return 4.0 * e / (n * (e - 1.0) * (e - 1.0)) +
         1.0 / (n * static_cast<double>(d));
}

// k-averaged estimator variance Var(n, epsilon). `n` may be fractional when
// evaluating bounds at scaled populations.
inline double fo_variance(FoKind kind, double n, double epsilon,
                          std::size_t d) {
  validate_fo_config(epsilon, d);
  if (!(n > 0.0)) return kInfinity;
  switch (kind) {
    case FoKind::kKrr:
      return krr_variance(n, epsilon, d);
    case FoKind::kOue:
      return oue_variance(n, epsilon, d);
    case FoKind::kAda:
      return std::min(krr_variance(n, epsilon, d),
                      oue_variance(n, epsilon, d));
  }
  return kInfinity;
}

inline FoKind resolve_ada(double epsilon, std::size_t d) {
  return oue_variance(1.0, epsilon, d) < krr_variance(1.0, epsilon, d)
             ? FoKind::kOue
             : FoKind::kKrr;
}

inline FoParams fo_params(FoKind kind, double epsilon, std::size_t d) {
  validate_fo_config(epsilon, d);
  if (kind == FoKind::kAda) kind = resolve_ada(epsilon, d);
  FoParams out;
  out.kind = kind;
  out.epsilon = epsilon;
  out.d = d;
  const double e = std::exp(epsilon);
  if (kind == FoKind::kKrr) {
    out.p = e / (e + static_cast<double>(d) - 1.0);
    out.q = 1.0 / (e + static_cast<double>(d) - 1.0);
  } else {
    out.p = 0.5;
    out.q = 1.0 / (e + 1.0);
  }
  if (!(out.p > out.q) || out.p / out.q > e * (1.0 + 1e-12)) {
    throw InvalidConfigError("perturbation parameters violate the LDP bound");
  }
  return out;
}

inline FoReport fo_perturb(const FoParams& params, std::size_t value,
                           Rng& rng) {
  if (value >= params.d) {
    throw DomainError("item index " + std::to_string(value) +
                      " outside domain of size " + std::to_string(params.d));
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FoReport r;
  if (params.kind == FoKind::kKrr) {
    if (unit(rng) < params.p) {
      r.item = value;
    } else {
      std::uniform_int_distribution<std::size_t> other(0, params.d - 2);
      std::size_t u = other(rng);
      r.item = u >= value ? u + 1 : u;
    }
    return r;
  }
  r.bits.assign(params.d, 0);
  for (std::size_t k = 0; k < params.d; ++k) {
    const double keep = k == value ? params.p : params.q;
    r.bits[k] = unit(rng) < keep ? 1 : 0;
  }
  return r;
}

inline std::vector<double> fo_support_counts(const FoParams& params,
                                             std::span<const FoReport> reports) {
  std::vector<double> support(params.d, 0.0);
  for (const FoReport& r : reports) {
    if (params.kind == FoKind::kKrr) {
      if (r.item >= params.d) throw DomainError("kRR report outside domain");
      support[r.item] += 1.0;
    } else {
      if (r.bits.size() != params.d) {
        throw DomainError("OUE report length differs from d");
      }
      for (std::size_t k = 0; k < params.d; ++k) support[k] += r.bits[k];
    }
  }
  return support;
}

// Unbiased estimate from per-item support counts over `n_reports` reports.
inline FrequencyVector fo_estimate(const FoParams& params,
                                   std::span<const double> support,
                                   double n_reports) {
  check_same_size(support.size(), params.d, "fo_estimate");
  if (!(n_reports > 0.0)) throw EmptyInputError("no reports to aggregate");
  FrequencyVector f(params.d);
  for (std::size_t k = 0; k < params.d; ++k) {
    f[k] = (support[k] / n_reports - params.q) / (params.p - params.q);
  }
  return f;
}

inline FrequencyVector fo_aggregate(const FoParams& params,
                                    std::span<const FoReport> reports) {
  if (reports.empty()) throw EmptyInputError("empty report set");
  const auto support = fo_support_counts(params, reports);
  return fo_estimate(params, support, static_cast<double>(reports.size()));
}

// Perturbs `true_counts[k]` users holding item k and returns the per-item
// support counts. Equal in distribution to perturbing each user with
// fo_perturb and summing supports, at O(d^2) cost instead of O(n d).
inline std::vector<double> fo_perturb_counts(
    const FoParams& params, std::span<const std::int64_t> true_counts,
    Rng& rng) {
  check_same_size(true_counts.size(), params.d, "fo_perturb_counts");
  const std::size_t d = params.d;
  std::vector<double> support(d, 0.0);
  if (params.kind == FoKind::kKrr) {
    for (std::size_t v = 0; v < d; ++v) {
      const std::int64_t c = true_counts[v];
      if (c <= 0) continue;
      const std::int64_t keep = draw_binomial(c, params.p, rng);
      support[v] += static_cast<double>(keep);
      std::int64_t rest = c - keep;
      std::size_t cells = d - 1;
      for (std::size_t k = 0; k < d && rest > 0; ++k) {
        if (k == v) continue;
        const std::int64_t x =
            cells == 1 ? rest
                       : draw_binomial(rest, 1.0 / static_cast<double>(cells),
                                       rng);
        support[k] += static_cast<double>(x);
        rest -= x;
        --cells;
      }
    }
    return support;
  }
  std::int64_t total = 0;
  for (std::int64_t c : true_counts) total += c;
  for (std::size_t k = 0; k < d; ++k) {
    const std::int64_t c = true_counts[k];
    support[k] = static_cast<double>(draw_binomial(c, params.p, rng) +
                                     draw_binomial(total - c, params.q, rng));
  }
  return support;
}

// Compact storage for a set of reports of one FO invocation: kRR items, or
// OUE bits in row-major order (one row of d bits per report).
struct ReportBatch {
  FoParams params;
  std::vector<std::uint32_t> items;
  std::vector<std::uint8_t> bits;

  std::size_t size() const {
    return params.kind == FoKind::kKrr ? items.size()
                                       : bits.size() / params.d;
  }

  void append(const FoReport& r) {
    if (params.kind == FoKind::kKrr) {
      items.push_back(static_cast<std::uint32_t>(r.item));
    } else {
      bits.insert(bits.end(), r.bits.begin(), r.bits.end());
    }
  }

  void add_support(std::size_t index, std::vector<double>& support) const {
    if (params.kind == FoKind::kKrr) {
      support[items[index]] += 1.0;
    } else {
      const std::uint8_t* row = bits.data() + index * params.d;
      for (std::size_t k = 0; k < params.d; ++k) support[k] += row[k];
    }
  }

  std::vector<double> support_counts() const {
    std::vector<double> support(params.d, 0.0);
    for (std::size_t i = 0; i < size(); ++i) add_support(i, support);
    return support;
  }
};

}  // namespace ldpstream
