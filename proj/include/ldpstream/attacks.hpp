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
#include <deque>
#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ldpstream/attack_core.hpp"
#include "ldpstream/common.hpp"
#include "ldpstream/data.hpp"
#include "ldpstream/freq_oracle.hpp"
#include "ldpstream/mean_mech.hpp"
#include "ldpstream/protocols.hpp"

namespace ldpstream {

enum class AttackKind { kIua, kOua, kIsa, kOsa, kIaa, kOaa };
enum class AttackStrategy { kUniform, kSampling, kAdaptive };

inline const char* to_string(AttackKind k) {
  switch (k) {
    case AttackKind::kIua:
      return "IUA";
    case AttackKind::kOua:
      return "OUA";
    case AttackKind::kIsa:
      return "ISA";
    case AttackKind::kOsa:
      return "OSA";
    case AttackKind::kIaa:
      return "IAA";
    case AttackKind::kOaa:
      return "OAA";
  }
  return "?";
}

inline AttackKind parse_attack_kind(std::string_view s) {
  for (auto k : {AttackKind::kIua, AttackKind::kOua, AttackKind::kIsa,
                 AttackKind::kOsa, AttackKind::kIaa, AttackKind::kOaa}) {
    if (s == to_string(k)) return k;
  }
  throw InvalidConfigError("unknown attack '" + std::string(s) + "'");
}

inline bool is_output_attack(AttackKind k) {
  return k == AttackKind::kOua || k == AttackKind::kOsa ||
         k == AttackKind::kOaa;
}

inline AttackStrategy strategy_of(AttackKind k) {
  switch (k) {
    case AttackKind::kIua:
    case AttackKind::kOua:
      return AttackStrategy::kUniform;
    case AttackKind::kIsa:
    case AttackKind::kOsa:
      return AttackStrategy::kSampling;
    default:
      return AttackStrategy::kAdaptive;
  }
}

inline const char* to_string(KnowledgeMode m) {
  switch (m) {
    case KnowledgeMode::kFull:
      return "full";
    case KnowledgeMode::kPartial:
      return "partial";
    case KnowledgeMode::kMitm:
      return "mitm";
  }
  return "?";
}

inline KnowledgeMode parse_knowledge_mode(std::string_view s) {
  for (auto m :
       {KnowledgeMode::kFull, KnowledgeMode::kPartial, KnowledgeMode::kMitm}) {
    if (s == to_string(m)) return m;
  }
  throw InvalidConfigError("unknown knowledge mode '" + std::string(s) + "'");
}

// One-shot knowledge estimate from the genuine values at a timestamp; the
// observed subset is drawn afresh from `rng`.
inline Knowledge estimate_knowledge(KnowledgeMode mode, double rho,
                                    std::span<const std::uint16_t> values,
                                    std::size_t d, double n_e,
                                    const FoParams& intercept, Rng& rng) {
  if (mode != KnowledgeMode::kFull && !(rho > 0.0 && rho <= 1.0)) {
    throw InvalidConfigError("observed fraction rho must lie in (0, 1]");
  }
  Knowledge kn;
  kn.n_e = n_e;
  kn.mode = mode;
  kn.rho = mode == KnowledgeMode::kFull ? 1.0 : rho;
  std::vector<std::int64_t> counts(d, 0);
  std::size_t observed = 0;
  if (mode == KnowledgeMode::kFull) {
    for (auto v : values) ++counts[v];
    observed = values.size();
  } else {
    const auto want = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(rho * static_cast<double>(values.size()))));
    std::vector<std::uint32_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::uint32_t j : take_random(idx, want, rng)) ++counts[values[j]];
    observed = want;
  }
  if (mode == KnowledgeMode::kMitm) {
    const auto support = fo_perturb_counts(intercept, counts, rng);
    kn.f_e = fo_estimate(intercept, support, static_cast<double>(observed));
  } else {
    kn.f_e.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      kn.f_e[k] =
          static_cast<double>(counts[k]) / static_cast<double>(observed);
    }
  }
  return kn;
}

// Knowledge source with a fixed observed subset of genuine users.
class KnowledgeEstimator {
 public:
  KnowledgeEstimator(KnowledgeMode mode, double rho, std::size_t n,
                     double n_e, std::uint64_t seed)
      : mode_(mode), rho_(rho), n_e_(n_e) {
    if (mode != KnowledgeMode::kFull) {
      if (!(rho > 0.0 && rho <= 1.0)) {
        throw InvalidConfigError("observed fraction rho must lie in (0, 1]");
      }
      Rng rng(seed);
      std::vector<std::uint32_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0u);
      const auto want = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(rho * static_cast<double>(n))));
      subset_ = take_random(idx, want, rng);
      std::sort(subset_.begin(), subset_.end());
    }
  }

  KnowledgeMode mode() const { return mode_; }
  double n_e() const { return n_e_; }

  Knowledge estimate(const CategoricalStream& s, std::size_t t,
                     const FoParams& intercept, Rng& rng) const {
    Knowledge kn;
    kn.n_e = n_e_;
    kn.mode = mode_;
    kn.rho = mode_ == KnowledgeMode::kFull ? 1.0 : rho_;
    if (mode_ == KnowledgeMode::kFull) {
      kn.f_e = s.frequencies(t);
      return kn;
    }
    std::vector<std::int64_t> counts(s.d, 0);
    const auto row = s.slice(t);
    for (std::uint32_t j : subset_) ++counts[row[j]];
    const double obs = static_cast<double>(subset_.size());
    if (mode_ == KnowledgeMode::kMitm) {
      kn.f_e = fo_estimate(intercept, fo_perturb_counts(intercept, counts, rng),
                           obs);
    } else {
      kn.f_e.resize(s.d);
      for (std::size_t k = 0; k < s.d; ++k) {
        kn.f_e[k] = static_cast<double>(counts[k]) / obs;
      }
    }
    return kn;
  }

 private:
  KnowledgeMode mode_;
  double rho_;
  double n_e_;
  std::vector<std::uint32_t> subset_;
};

// Attacker-side mirror of a protocol's publication allocation, fed by what
// the fake users observe: Q_m holds the last w-1 publication quantities.
class AllocationMirror {
 public:
  AllocationMirror(ProtocolKind tuned_for, double epsilon, std::size_t w,
                   double population_estimate)
      : kind_(tuned_for),
        epsilon_(epsilon),
        w_(std::max<std::size_t>(w, 1)),
        population_(population_estimate) {}

  ProtocolKind kind() const { return kind_; }
  bool population_division() const { return is_population_division(kind_); }
  const std::deque<double>& q_m() const { return q_m_; }

  double estimate(std::size_t t) const {
    const double w = static_cast<double>(w_);
    double sum = 0.0;
    for (double v : q_m_) sum += v;
    switch (kind_) {
      case ProtocolKind::kLbd:
        return std::max(0.0, (epsilon_ / 2.0 - sum) / 2.0);
      case ProtocolKind::kLba:
        return static_cast<double>(units(t)) * epsilon_ / (2.0 * w);
      case ProtocolKind::kLpd:
        return std::floor(std::max(0.0, (population_ / 2.0 - sum) / 2.0));
      case ProtocolKind::kLpa:
        return std::floor(static_cast<double>(units(t)) * population_ /
                          (2.0 * w));
      case ProtocolKind::kLbu:
        return epsilon_ / w;
      case ProtocolKind::kLpu:
        return std::max(1.0, std::floor(population_ / w));
      case ProtocolKind::kLsp:
        return t % w_ == 0 ? (population_division() ? population_ : epsilon_)
                           : 0.0;
    }
    return 0.0;
  }

  void record(std::size_t t, double quantity) {
    if (quantity > 0.0) {
      last_pub_ = static_cast<long>(t);
      const double unit = population_division()
                              ? population_ / (2.0 * static_cast<double>(w_))
                              : epsilon_ / (2.0 * static_cast<double>(w_));
      last_units_ = static_cast<std::size_t>(std::clamp(
          std::round(quantity / unit), 1.0, static_cast<double>(w_)));
    }
    if (w_ > 1) {
      q_m_.push_back(quantity);
      while (q_m_.size() > w_ - 1) q_m_.pop_front();
    }
  }

 private:
  std::size_t units(std::size_t t) const {
    const long tl = static_cast<long>(t);
    long available = tl + 1;
    if (last_pub_ >= 0) {
      const long nullified = static_cast<long>(last_units_) - 1;
      if (tl - last_pub_ <= nullified) return 0;
      available = tl - last_pub_ - nullified;
    }
    return static_cast<std::size_t>(
        std::min<long>(available, static_cast<long>(w_)));
  }

  ProtocolKind kind_;
  double epsilon_;
  std::size_t w_;
  double population_;
  std::deque<double> q_m_;
  long last_pub_ = -1;
  std::size_t last_units_ = 0;
};

struct AttackerConfig {
  AttackKind kind = AttackKind::kOaa;
  ProtocolKind tuned_for = ProtocolKind::kLbd;
  double epsilon = 1.0;
  std::size_t w = 20;
  std::int64_t m = 0;
  Estimator estimator;
};

struct AttackTraceRow {
  std::size_t t = 0;
  Strategy msd_choice = Strategy::kPublication;
  std::optional<Direction> dma_direction;
  std::optional<bool> dma_success;
  double gap = 0.0;
};

// Frequency-stream attacker implementing the Uniform, Sampling and Adaptive
// strategies with input or output poisoning.
class Attacker {
 public:
  explicit Attacker(AttackerConfig cfg, double n_e)
      : cfg_(cfg),
        n_e_(n_e),
        mirror_(cfg.tuned_for, cfg.epsilon, cfg.w,
                n_e + static_cast<double>(cfg.m)) {}

  const AttackerConfig& config() const { return cfg_; }
  const AllocationMirror& mirror() const { return mirror_; }
  double last_quantity_estimate() const { return quantity_estimate_; }
  double last_potential_gap() const { return potential_gap_; }

  void begin_step(std::size_t t, const FrequencyVector& last_release,
                  const Knowledge& kn, const FrequencyVector& target) {
    t_ = t;
    last_release_ = last_release;
    knowledge_ = kn;
    target_ = target;
    dma_launched_ = false;
    observed_quantity_.reset();
    quantity_estimate_ = mirror_.estimate(t);
    potential_gap_ = kInfinity;
    switch (strategy_of(cfg_.kind)) {
      case AttackStrategy::kUniform:
        choice_ = Strategy::kPublication;
        break;
      case AttackStrategy::kSampling:
        choice_ = t % cfg_.w == 0 ? Strategy::kPublication
                                  : Strategy::kApproximation;
        break;
      case AttackStrategy::kAdaptive: {
        potential_gap_ = potential_gap(quantity_estimate_);
        choice_ = msd_choose(mean_squared_distance(last_release, target),
                             potential_gap_);
        break;
      }
    }
  }

  FakeAllocation dissimilarity_allocation(const FoParams& params,
                                          std::int64_t fake_count) {
    dma_launched_ = true;
    const Knowledge kn = scaled(fake_count);
    const Direction dir = direction();
    if (is_output_attack(cfg_.kind)) {
      return odma_extreme(kn, last_release_, fake_count, dir, params);
    }
    return idma_extreme(kn, last_release_, fake_count, dir);
  }

  FakeAllocation publication_allocation(const FoParams& params,
                                        std::int64_t fake_count) {
    if (mirror_.population_division()) {
      observed_quantity_ =
          fake_count > 0 && cfg_.m > 0
              ? std::floor(static_cast<double>(fake_count) *
                           (n_e_ + static_cast<double>(cfg_.m)) /
                           static_cast<double>(cfg_.m))
              : quantity_estimate_;
    } else {
      observed_quantity_ = params.epsilon;
    }
    const Knowledge kn = scaled(fake_count);
    if (is_output_attack(cfg_.kind)) {
      return opma_solve(kn, target_, fake_count, params);
    }
    return ipma_solve(kn, target_, fake_count);
  }

  void end_step(const StepOutcome& out, double gap) {
    AttackTraceRow row;
    row.t = t_;
    row.msd_choice = choice_;
    row.gap = gap;
    if (dma_launched_) {
      row.dma_direction = direction();
      row.dma_success = (choice_ == out.strategy);
      ++launched_;
      if (*row.dma_success) ++successes_;
    }
    double q = 0.0;
    if (out.strategy == Strategy::kPublication) {
      q = observed_quantity_.value_or(quantity_estimate_);
    }
    mirror_.record(t_, q);
    trace_.push_back(row);
  }

  std::size_t dma_launched() const { return launched_; }
  std::size_t dma_successes() const { return successes_; }
  double dma_success_rate() const {
    return launched_ == 0 ? std::nan("")
                          : static_cast<double>(successes_) /
                                static_cast<double>(launched_);
  }
  const std::vector<AttackTraceRow>& trace() const { return trace_; }

  // Expected gap of a publication with quantity q (budget or population)
  // under the attacker's knowledge.
  double potential_gap(double q) const {
    const double m = static_cast<double>(cfg_.m);
    double mm = m;
    double nn = n_e_;
    double eps = q;
    if (mirror_.population_division()) {
      if (q < 1.0) return kInfinity;
      mm = m * q / (m + n_e_);
      nn = n_e_ * q / (m + n_e_);
      eps = cfg_.epsilon;
    } else if (!(q > 0.0)) {
      return kInfinity;
    }
    Knowledge kn = knowledge_;
    kn.n_e = nn;
    const std::size_t d = target_.size();
    if (is_output_attack(cfg_.kind)) {
      const FoParams params = fo_params(cfg_.estimator.fo, eps, d);
      const auto x = opma_solve_continuous(kn, target_, mm, params);
      return opma_gap(x, nn, kn.f_e, target_, params, mm).value();
    }
    const auto x = ipma_solve_continuous(kn, target_, mm);
    return ipma_gap(x, nn, kn.f_e, target_, cfg_.estimator.fo, eps, mm)
        .value();
  }

 private:
  Direction direction() const {
    return choice_ == Strategy::kPublication ? Direction::kMaximize
                                             : Direction::kMinimize;
  }

  Knowledge scaled(std::int64_t fake_count) const {
    Knowledge kn = knowledge_;
    if (cfg_.m > 0 && fake_count != cfg_.m) {
      kn.n_e = n_e_ * static_cast<double>(fake_count) /
               static_cast<double>(cfg_.m);
    } else {
      kn.n_e = n_e_;
    }
    return kn;
  }

  AttackerConfig cfg_;
  double n_e_;
  AllocationMirror mirror_;
  std::size_t t_ = 0;
  FrequencyVector last_release_;
  FrequencyVector target_;
  Knowledge knowledge_;
  Strategy choice_ = Strategy::kPublication;
  bool dma_launched_ = false;
  std::optional<double> observed_quantity_;
  double quantity_estimate_ = 0.0;
  double potential_gap_ = kInfinity;
  std::size_t launched_ = 0;
  std::size_t successes_ = 0;
  std::vector<AttackTraceRow> trace_;
};

inline void write_attack_trace_csv(std::ostream& os,
                                   const std::vector<AttackTraceRow>& rows) {
  os << "t,msd_choice,dma_direction,dma_success,gap_t\n";
  for (const auto& r : rows) {
    os << r.t << ',' << to_string(r.msd_choice) << ',';
    if (r.dma_direction) {
      os << (*r.dma_direction == Direction::kMaximize ? "maximize"
                                                      : "minimize");
    }
    os << ',';
    if (r.dma_success) os << (*r.dma_success ? 1 : 0);
    os << ',' << r.gap << '\n';
  }
}

// Theoretical gap reference: G(m * m_scale, n * n_scale, eps * eps_scale).
struct BoundArg {
  double m_scale = 1.0;
  double n_scale = 1.0;
  double eps_scale = 1.0;
};

struct BoundCell {
  bool available = false;
  bool interval = false;      // lo/hi differ; otherwise only lo is used
  bool sampling_form = false;  // includes the approximation tail term
  BoundArg lo;
  BoundArg hi;
};

inline BoundCell bound_cell(ProtocolKind protocol, AttackKind attack,
                            std::size_t w) {
  const double wd = static_cast<double>(w);
  const double tiny = std::pow(2.0, -(wd + 1.0));
  const AttackStrategy s = strategy_of(attack);
  BoundCell c;
  auto single = [&](BoundArg a) {
    c.available = true;
    c.lo = a;
    c.hi = a;
  };
  auto range = [&](BoundArg lo, BoundArg hi) {
    c.available = true;
    c.interval = true;
    c.lo = lo;
    c.hi = hi;
  };
  switch (protocol) {
    case ProtocolKind::kLbd:
      if (s == AttackStrategy::kSampling) {
        single({1, 1, 0.25});
      } else {
        range({1, 1, 0.25}, {1, 1, tiny});
      }
      break;
    case ProtocolKind::kLba:
      if (s == AttackStrategy::kUniform) {
        single({1, 1, 1.0 / (2.0 * wd)});
      } else if (s == AttackStrategy::kSampling) {
        single({1, 1, 0.5});
      } else {
        range({1, 1, 0.5}, {1, 1, 1.0 / (2.0 * wd)});
      }
      break;
    case ProtocolKind::kLpd:
      if (s == AttackStrategy::kSampling) {
        single({0.25, 0.25, 1});
      } else {
        range({0.25, 0.25, 1}, {tiny, tiny, 1});
      }
      break;
    case ProtocolKind::kLpa:
      if (s == AttackStrategy::kUniform) {
        single({1.0 / (2.0 * wd), 1.0 / (2.0 * wd), 1});
      } else if (s == AttackStrategy::kSampling) {
        single({0.5, 0.5, 1});
      } else {
        range({0.5, 0.5, 1}, {1.0 / (2.0 * wd), 1.0 / (2.0 * wd), 1});
      }
      break;
    case ProtocolKind::kLbu:
      if (s == AttackStrategy::kUniform) single({1, 1, 1.0 / wd});
      break;
    case ProtocolKind::kLpu:
      if (s == AttackStrategy::kUniform) single({1.0 / wd, 1.0 / wd, 1});
      break;
    case ProtocolKind::kLsp:
      if (s == AttackStrategy::kSampling) single({1, 1, 1});
      break;
  }
  c.sampling_form = c.available && s == AttackStrategy::kSampling;
  return c;
}

// Approximation-tail ingredients of the sampling-form bounds: the fraction of
// timestamps that are sampling slots and the mean over all timestamps of the
// squared distance between targets and the sampled release.
struct SamplingTerms {
  double sampling_fraction = 1.0;
  double tail_mean = 0.0;
};

struct BoundValue {
  bool available = false;
  double lo = std::nan("");
  double hi = std::nan("");
};

using GapFunction = std::function<double(double m, double n, double eps)>;

inline BoundValue bound_table(ProtocolKind protocol, AttackKind attack,
                              double m, double n, double epsilon,
                              std::size_t w, const GapFunction& gap,
                              const SamplingTerms& sampling = {}) {
  const BoundCell cell = bound_cell(protocol, attack, w);
  BoundValue v;
  if (!cell.available) return v;
  v.available = true;
  auto eval = [&](const BoundArg& a) {
    double g = gap(m * a.m_scale, n * a.n_scale, epsilon * a.eps_scale);
    if (cell.sampling_form) {
      g = sampling.sampling_fraction * g + sampling.tail_mean;
    }
    return g;
  };
  const double a = eval(cell.lo);
  const double b = cell.interval ? eval(cell.hi) : a;
  // The gap need not be monotone in the budget for output attacks.
  v.lo = std::min(a, b);
  v.hi = std::max(a, b);
  return v;
}

// Single-instance convenience: expected gaps from the continuous PMA optimum
// with exact knowledge of (n, f).
inline BoundValue bound_table(ProtocolKind protocol, AttackKind attack,
                              double m, double n, double epsilon,
                              std::size_t w, FoKind fo,
                              std::span<const double> f_true,
                              std::span<const double> target) {
  const FrequencyVector f(f_true.begin(), f_true.end());
  const FrequencyVector ft(target.begin(), target.end());
  const bool output = is_output_attack(attack);
  GapFunction gap = [=](double mm, double nn, double eps) {
    Knowledge kn{nn, f};
    if (output) {
      const FoParams params = fo_params(fo, eps, f.size());
      const auto x = opma_solve_continuous(kn, ft, mm, params);
      return opma_gap(x, nn, f, ft, params, mm).value();
    }
    const auto x = ipma_solve_continuous(kn, ft, mm);
    return ipma_gap(x, nn, f, ft, fo, eps, mm).value();
  };
  return bound_table(protocol, attack, m, n, epsilon, w, gap);
}

// ---- Mean estimation -------------------------------------------------------

struct MeanKnowledge {
  double n_e = 0.0;
  double s1_e = 0.0;  // attacker estimate of the sum of genuine inputs
  double s2 = 0.0;    // sum of squared genuine inputs
  double mu = 0.0;    // true mean
};

// Output-poisoning gap of stochastic rounding; m, n and n_e are doubled
// because the source formulas assume half the users report the mean.
inline double opa_gap_sr(double m, double n, double n_e, double epsilon,
                         double s1, double s1_e, double s2, double mu) {
  const double mm = 2.0 * m;
  const double nn = 2.0 * n;
  const double ne = 2.0 * n_e;
  const double e = std::exp(epsilon);
  const double pq = (e - 1.0) / (e + 1.0);
  const double tot = mm + nn;
  const double bias_root = (ne - nn) / tot * mu + (s1 - s1_e) / tot;
  return (2.0 * nn - 2.0 * pq * pq * s2) / (tot * tot * pq * pq) +
         s2 / (tot * tot) + bias_root * bias_root;
}

inline double opa_gap_pm(double m, double n, double n_e, double epsilon,
                         double s1, double s1_e, double s2, double mu) {
  const double mm = 2.0 * m;
  const double nn = 2.0 * n;
  const double ne = 2.0 * n_e;
  const double h = std::exp(epsilon / 2.0);
  const double tot = mm + nn;
  const double bias_root = (ne - nn) / tot * mu + (s1 - s1_e) / tot;
  return bias_root * bias_root +
         2.0 * nn * (h + 3.0) / (3.0 * tot * tot * (h - 1.0) * (h - 1.0)) +
         (1.0 + h) * s2 / (tot * tot * (h - 1.0));
}

// Hybrid mechanism: branch gaps weighted by the branch probabilities.
inline double opa_gap_hm(double m, double n, double n_e, double epsilon,
                         double s1, double s1_e, double s2, double mu) {
  const double a = hm_pm_probability(epsilon);
  double g = (1.0 - a) * opa_gap_sr(m, n, n_e, epsilon, s1, s1_e, s2, mu);
  if (a > 0.0) g += a * opa_gap_pm(m, n, n_e, epsilon, s1, s1_e, s2, mu);
  return g;
}

// Fake outputs (in the hybrid mechanism's output support on [-1, 1]) whose
// sum is as close as possible to `required_sum`.
inline std::vector<double> opa_fake_outputs(double required_sum,
                                            std::int64_t m, double epsilon) {
  std::vector<double> out;
  if (m <= 0) return out;
  const double md = static_cast<double>(m);
  if (hm_pm_probability(epsilon) > 0.0) {
    const double c = pm_bound(epsilon);
    out.assign(static_cast<std::size_t>(m),
               std::clamp(required_sum / md, -c, c));
    return out;
  }
  const double s = sr_bound(epsilon);
  const double plus =
      std::clamp(std::round((required_sum / s + md) / 2.0), 0.0, md);
  out.assign(static_cast<std::size_t>(m), -s);
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(plus), s);
  return out;
}

struct MeanAttackerConfig {
  AttackKind kind = AttackKind::kOaa;
  ProtocolKind tuned_for = ProtocolKind::kLbd;
  double epsilon = 1.0;
  std::size_t w = 20;
  std::int64_t m = 0;
  double lo = -1.0;
  double hi = 1.0;
};

// Mean-stream attacker: output poisoning toward the target for publications;
// dissimilarity minimized toward the last release or maximized toward the
// domain endpoint farther from it.
class MeanAttacker {
 public:
  MeanAttacker(MeanAttackerConfig cfg, double n_e)
      : cfg_(cfg),
        n_e_(n_e),
        mirror_(cfg.tuned_for, cfg.epsilon, cfg.w,
                n_e + static_cast<double>(cfg.m)) {}

  static double maximize_target(double last_release, double lo, double hi) {
    return std::abs(hi - last_release) > std::abs(last_release - lo) ? hi : lo;
  }

  void begin_step(std::size_t t, double last_release, const MeanKnowledge& kn,
                  double target) {
    t_ = t;
    last_ = last_release;
    kn_ = kn;
    target_ = target;
    dma_launched_ = false;
    observed_.reset();
    estimate_ = mirror_.estimate(t);
    switch (strategy_of(cfg_.kind)) {
      case AttackStrategy::kUniform:
        choice_ = Strategy::kPublication;
        break;
      case AttackStrategy::kSampling:
        choice_ = t % cfg_.w == 0 ? Strategy::kPublication
                                  : Strategy::kApproximation;
        break;
      case AttackStrategy::kAdaptive: {
        const double d = last_release - target;
        choice_ = msd_choose(d * d, potential_gap(estimate_));
        break;
      }
    }
  }

  double potential_gap(double q) const {
    const double m = static_cast<double>(cfg_.m);
    double mm = m;
    double nn = n_e_;
    double eps = q;
    if (mirror_.population_division()) {
      if (q < 1.0) return kInfinity;
      mm = m * q / (m + n_e_);
      nn = n_e_ * q / (m + n_e_);
      eps = cfg_.epsilon;
    } else if (!(q > 0.0)) {
      return kInfinity;
    }
    const double scale = n_e_ > 0.0 ? nn / n_e_ : 0.0;
    return opa_gap_hm(mm, nn, nn, eps, kn_.s1_e * scale, kn_.s1_e * scale,
                      kn_.s2 * scale, kn_.mu);
  }

  std::vector<double> dissimilarity_outputs(double epsilon,
                                            std::int64_t fake_count) {
    dma_launched_ = true;
    const double goal = choice_ == Strategy::kPublication
                            ? maximize_target(last_, cfg_.lo, cfg_.hi)
                            : last_;
    return outputs_toward(goal, epsilon, fake_count);
  }

  std::vector<double> publication_outputs(double epsilon,
                                          std::int64_t fake_count) {
    if (mirror_.population_division()) {
      observed_ = fake_count > 0 && cfg_.m > 0
                      ? std::floor(static_cast<double>(fake_count) *
                                   (n_e_ + static_cast<double>(cfg_.m)) /
                                   static_cast<double>(cfg_.m))
                      : estimate_;
    } else {
      observed_ = epsilon;
    }
    return outputs_toward(target_, epsilon, fake_count);
  }

  void end_step(const StepOutcome& out) {
    if (dma_launched_) {
      ++launched_;
      if (choice_ == out.strategy) ++successes_;
    }
    mirror_.record(t_, out.strategy == Strategy::kPublication
                           ? observed_.value_or(estimate_)
                           : 0.0);
  }

  double dma_success_rate() const {
    return launched_ == 0 ? std::nan("")
                          : static_cast<double>(successes_) /
                                static_cast<double>(launched_);
  }

 private:
  std::vector<double> outputs_toward(double goal, double epsilon,
                                     std::int64_t fake_count) const {
    const double scale = cfg_.m > 0 ? static_cast<double>(fake_count) /
                                          static_cast<double>(cfg_.m)
                                    : 0.0;
    const double ne = n_e_ * scale;
    const double s1e = kn_.s1_e * scale;
    // Work on [-1, 1]; map back to the declared domain afterwards.
    const double half = (cfg_.hi - cfg_.lo) / 2.0;
    const double mid = (cfg_.hi + cfg_.lo) / 2.0;
    const double g = (goal - mid) / half;
    const double s1n = (s1e - ne * mid) / half;
    auto z = opa_fake_outputs((ne + static_cast<double>(fake_count)) * g - s1n,
                              fake_count, epsilon);
    for (double& v : z) v = mid + half * v;
    return z;
  }

  MeanAttackerConfig cfg_;
  double n_e_;
  AllocationMirror mirror_;
  std::size_t t_ = 0;
  double last_ = 0.0;
  double target_ = 0.0;
  MeanKnowledge kn_;
  Strategy choice_ = Strategy::kPublication;
  bool dma_launched_ = false;
  std::optional<double> observed_;
  double estimate_ = 0.0;
  std::size_t launched_ = 0;
  std::size_t successes_ = 0;
};

// Fake values that move the expected mean of a numeric stream to the target.
inline std::vector<double> cgm_attack(const MeanKnowledge& kn,
                                      double target_mean, std::int64_t m,
                                      double lo = -1.0, double hi = 1.0) {
  if (m <= 0) return {};
  const double md = static_cast<double>(m);
  const double z =
      ((kn.n_e + md) * target_mean - kn.n_e * kn.mu) / md;
  return std::vector<double>(static_cast<std::size_t>(m),
                             std::clamp(z, lo, hi));
}

}  // namespace ldpstream
