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
#include <concepts>
#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ldpstream/common.hpp"
#include "ldpstream/freq_oracle.hpp"
#include "ldpstream/mean_mech.hpp"

namespace ldpstream {

enum class ProtocolKind { kLbd, kLba, kLpd, kLpa, kLbu, kLpu, kLsp };

inline const char* to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::kLbd:
      return "LBD";
    case ProtocolKind::kLba:
      return "LBA";
    case ProtocolKind::kLpd:
      return "LPD";
    case ProtocolKind::kLpa:
      return "LPA";
    case ProtocolKind::kLbu:
      return "LBU";
    case ProtocolKind::kLpu:
      return "LPU";
    case ProtocolKind::kLsp:
      return "LSP";
  }
  return "?";
}

inline ProtocolKind parse_protocol_kind(std::string_view s) {
  for (auto k : {ProtocolKind::kLbd, ProtocolKind::kLba, ProtocolKind::kLpd,
                 ProtocolKind::kLpa, ProtocolKind::kLbu, ProtocolKind::kLpu,
                 ProtocolKind::kLsp}) {
    if (s == to_string(k)) return k;
  }
  throw InvalidConfigError("unknown protocol '" + std::string(s) + "'");
}

inline bool is_population_division(ProtocolKind k) {
  return k == ProtocolKind::kLpd || k == ProtocolKind::kLpa ||
         k == ProtocolKind::kLpu;
}

inline bool has_dissimilarity_phase(ProtocolKind k) {
  return k == ProtocolKind::kLbd || k == ProtocolKind::kLba ||
         k == ProtocolKind::kLpd || k == ProtocolKind::kLpa;
}

inline bool uses_absorption(ProtocolKind k) {
  return k == ProtocolKind::kLba || k == ProtocolKind::kLpa;
}

enum class Strategy { kPublication, kApproximation };
enum class Phase { kDissimilarity, kPublication };

inline const char* to_string(Strategy s) {
  return s == Strategy::kPublication ? "publication" : "approximation";
}

// What is being estimated at each timestamp and the matching Var(n, eps).
struct Estimator {
  enum class Task { kFrequency, kMean };
  Task task = Task::kFrequency;
  FoKind fo = FoKind::kAda;
  std::size_t d = 2;

  std::size_t dim() const { return task == Task::kMean ? 1 : d; }

  double variance(double n, double epsilon) const {
    if (!(n > 0.0) || !(epsilon > 0.0)) return kInfinity;
    if (task == Task::kMean) return hm_worst_variance(epsilon) / n;
    return fo_variance(fo, n, epsilon, d);
  }
};

struct CollectRequest {
  std::size_t t = 0;
  Phase phase = Phase::kDissimilarity;
  double epsilon = 1.0;
  bool all_users = true;
  std::span<const std::uint32_t> users;  // used when !all_users
  bool want_batch = false;
};

struct Collected {
  FrequencyVector estimate;
  std::size_t reports = 0;
  std::optional<ReportBatch> batch;
};

// Anything that can answer the aggregator's report requests: genuine users,
// possibly mixed with an attacker's fake users.
template <class S>
concept ReportSource = requires(S& s, const CollectRequest& req) {
  { s.population() } -> std::convertible_to<std::size_t>;
  { s.collect(req) } -> std::same_as<Collected>;
};

struct PublicationContext {
  std::size_t t = 0;
  const FrequencyVector* f_bar = nullptr;  // null without a phase-1 estimate
  double epsilon_1 = 0.0;
  double reports_1 = 0.0;
  const Collected* published = nullptr;
  double epsilon_2 = 0.0;
  double reports_2 = 0.0;
  const Estimator* estimator = nullptr;
};

// Release rule applied to a fresh publication; the default keeps it.
struct KeepPublication {
  bool wants_batch() const { return false; }
  FrequencyVector operator()(const PublicationContext& ctx) const {
    return ctx.published->estimate;
  }
};

struct StepOutcome {
  std::size_t t = 0;
  Strategy strategy = Strategy::kApproximation;
  FrequencyVector release;
  FrequencyVector f_bar;  // empty when the kind has no dissimilarity phase
  double dis_bar = std::nan("");
  double err = std::nan("");
  double budget_used = 0.0;
  double population_used = 0.0;
  double publication_quantity = 0.0;  // epsilon_{t,2} or |U_{t,2}|
  bool forced = false;
};

struct ProtocolConfig {
  ProtocolKind kind = ProtocolKind::kLbd;
  double epsilon = 1.0;
  std::size_t w = 20;
  Estimator estimator;
};

struct ProtocolTrace {
  ProtocolKind kind = ProtocolKind::kLbd;
  double epsilon = 1.0;
  std::size_t w = 1;
  double population = 0.0;
  std::vector<StepOutcome> steps;
};

inline double dissimilarity(std::span<const double> f_bar,
                            std::span<const double> f_last, double var_term) {
  return mean_squared_distance(f_bar, f_last) - var_term;
}

class Protocol {
 public:
  Protocol(ProtocolConfig config, std::size_t population,
           FrequencyVector initial_release, std::uint64_t seed)
      : config_(std::move(config)),
        population_(population),
        last_release_(std::move(initial_release)),
        rng_(seed) {
    if (!(config_.epsilon > 0.0)) {
      throw InvalidConfigError("epsilon must be positive");
    }
    if (config_.w < 1) throw InvalidConfigError("window w must be >= 1");
    if (population_ < 1) throw InvalidConfigError("population must be >= 1");
    check_same_size(last_release_.size(), config_.estimator.dim(),
                    "initial release");
    if (is_population_division(config_.kind)) {
      pool_.resize(population_);
      for (std::size_t i = 0; i < population_; ++i) {
        pool_[i] = static_cast<std::uint32_t>(i);
      }
      returning_.resize(config_.w);
    }
  }

  const ProtocolConfig& config() const { return config_; }
  std::size_t population() const { return population_; }
  std::size_t now() const { return t_; }
  const FrequencyVector& last_release() const { return last_release_; }
  const std::deque<double>& window_history() const { return history_; }

  // Publication quantity the kind would offer at the current timestamp
  // (before phase 1 runs). Zero means publication is impossible.
  double offered_quantity() const {
    const double eps = config_.epsilon;
    const double w = static_cast<double>(config_.w);
    const double n = static_cast<double>(population_);
    switch (config_.kind) {
      case ProtocolKind::kLbd:
        return std::max(0.0, (eps / 2.0 - history_sum()) / 2.0);
      case ProtocolKind::kLba:
        return static_cast<double>(absorb_units()) * eps / (2.0 * w);
      case ProtocolKind::kLpd:
        return std::floor(std::max(0.0, (n / 2.0 - history_sum()) / 2.0));
      case ProtocolKind::kLpa:
        return std::floor(static_cast<double>(absorb_units()) * n / (2.0 * w));
      case ProtocolKind::kLbu:
        return eps / w;
      case ProtocolKind::kLpu:
        return std::max(1.0, std::floor(n / w));
      case ProtocolKind::kLsp:
        return t_ % config_.w == 0 ? eps : 0.0;
    }
    return 0.0;
  }

  template <ReportSource S, class Filter = KeepPublication>
  StepOutcome step(S& source, Filter&& filter = Filter{}) {
    if (source.population() != population_) {
      throw InvalidConfigError("report source population changed");
    }
    if (is_population_division(config_.kind)) release_returning_users();
    const std::size_t units = absorb_units();
    StepOutcome out;
    out.t = t_;
    const double eps = config_.epsilon;
    const double w = static_cast<double>(config_.w);
    const double n = static_cast<double>(population_);
    const Estimator& est = config_.estimator;

    switch (config_.kind) {
      case ProtocolKind::kLbu:
      case ProtocolKind::kLsp: {
        const double eps2 = offered_quantity();
        if (eps2 <= 0.0) {
          out.err = kInfinity;
          break;
        }
        out.err = est.variance(n, eps2);
        publish_all(source, filter, out, nullptr, 0.0, 0.0, eps2);
        break;
      }
      case ProtocolKind::kLpu: {
        const std::size_t u = static_cast<std::size_t>(offered_quantity());
        if (pool_.size() < u) {
          out.err = kInfinity;
          out.forced = true;
          break;
        }
        out.err = est.variance(static_cast<double>(u), eps);
        publish_sample(source, filter, out, nullptr, 0.0, 0.0, u);
        break;
      }
      case ProtocolKind::kLbd:
      case ProtocolKind::kLba: {
        const double eps1 = eps / (2.0 * w);
        CollectRequest req{t_, Phase::kDissimilarity, eps1, true, {}, false};
        Collected c1 = source.collect(req);
        out.f_bar = c1.estimate;
        const double r1 = static_cast<double>(c1.reports);
        out.dis_bar = dissimilarity(out.f_bar, last_release_,
                                    est.variance(r1, eps1));
        out.budget_used = eps1;
        const double eps2 = offered_quantity();
        if (!(eps2 > 1e-15)) {
          out.err = kInfinity;
          out.forced = true;
          break;
        }
        out.err = est.variance(n, eps2);
        if (out.dis_bar > out.err) {
          publish_all(source, filter, out, &out.f_bar, eps1, r1, eps2);
        }
        break;
      }
      case ProtocolKind::kLpd:
      case ProtocolKind::kLpa: {
        const std::size_t n1 = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(n / (2.0 * w))));
        if (pool_.size() < n1) {
          out.err = kInfinity;
          out.forced = true;
          break;
        }
        std::vector<std::uint32_t> users1 = take_random(pool_, n1, rng_);
        mark_used(users1);
        CollectRequest req{t_, Phase::kDissimilarity, eps, false, users1,
                           false};
        Collected c1 = source.collect(req);
        out.f_bar = c1.estimate;
        const double r1 = static_cast<double>(c1.reports);
        out.dis_bar = dissimilarity(out.f_bar, last_release_,
                                    est.variance(r1, eps));
        out.population_used = r1;
        const double u2 = offered_quantity();
        if (u2 < 1.0 || static_cast<double>(pool_.size()) < u2) {
          out.err = kInfinity;
          out.forced = true;
          break;
        }
        out.err = est.variance(u2, eps);
        if (out.dis_bar > out.err) {
          publish_sample(source, filter, out, &out.f_bar, eps, r1,
                         static_cast<std::size_t>(u2));
        }
        break;
      }
    }

    if (out.strategy == Strategy::kApproximation) {
      out.release = last_release_;
    } else {
      last_release_ = out.release;
      last_pub_t_ = static_cast<long>(t_);
      last_pub_units_ = uses_absorption(config_.kind) ? units : 1;
    }
    if (config_.w > 1) {
      history_.push_back(out.publication_quantity);
      while (history_.size() > config_.w - 1) history_.pop_front();
    }
    ++t_;
    return out;
  }

 private:
  double history_sum() const {
    double s = 0.0;
    for (double v : history_) s += v;
    return s;
  }

  // Budget absorption: allocations of skipped slots since the last
  // publication are absorbed, and a publication that absorbed k slots
  // nullifies the k-1 slots that follow it.
  std::size_t absorb_units() const {
    const long t = static_cast<long>(t_);
    long available = t + 1;
    if (last_pub_t_ >= 0) {
      const long nullified = static_cast<long>(last_pub_units_) - 1;
      if (t - last_pub_t_ <= nullified) return 0;
      available = t - last_pub_t_ - nullified;
    }
    return static_cast<std::size_t>(
        std::min<long>(available, static_cast<long>(config_.w)));
  }

  void release_returning_users() {
    auto& slot = returning_[t_ % config_.w];
    pool_.insert(pool_.end(), slot.begin(), slot.end());
    slot.clear();
  }

  void mark_used(const std::vector<std::uint32_t>& users) {
    auto& slot = returning_[t_ % config_.w];
    slot.insert(slot.end(), users.begin(), users.end());
  }

  template <class S, class Filter>
  void finish_publication(Filter& filter, StepOutcome& out,
                          const FrequencyVector* f_bar, double eps1, double r1,
                          double eps2, const Collected& c3) {
    PublicationContext ctx;
    ctx.t = t_;
    ctx.f_bar = f_bar;
    ctx.epsilon_1 = eps1;
    ctx.reports_1 = r1;
    ctx.published = &c3;
    ctx.epsilon_2 = eps2;
    ctx.reports_2 = static_cast<double>(c3.reports);
    ctx.estimator = &config_.estimator;
    out.release = filter(ctx);
    out.strategy = Strategy::kPublication;
  }

  template <class S, class Filter>
  void publish_all(S& source, Filter& filter, StepOutcome& out,
                   const FrequencyVector* f_bar, double eps1, double r1,
                   double eps2) {
    CollectRequest req{t_, Phase::kPublication, eps2, true, {},
                       filter.wants_batch()};
    Collected c3 = source.collect(req);
    finish_publication<S>(filter, out, f_bar, eps1, r1, eps2, c3);
    out.budget_used += eps2;
    out.publication_quantity = eps2;
  }

  template <class S, class Filter>
  void publish_sample(S& source, Filter& filter, StepOutcome& out,
                      const FrequencyVector* f_bar, double eps1, double r1,
                      std::size_t u2) {
    std::vector<std::uint32_t> users2 = take_random(pool_, u2, rng_);
    mark_used(users2);
    CollectRequest req{t_, Phase::kPublication, config_.epsilon, false,
                       users2, filter.wants_batch()};
    Collected c3 = source.collect(req);
    finish_publication<S>(filter, out, f_bar, eps1, r1, config_.epsilon, c3);
    out.population_used += static_cast<double>(u2);
    out.publication_quantity = static_cast<double>(u2);
  }

  ProtocolConfig config_;
  std::size_t population_;
  FrequencyVector last_release_;
  Rng rng_;
  std::size_t t_ = 0;
  std::deque<double> history_;
  long last_pub_t_ = -1;
  std::size_t last_pub_units_ = 0;
  std::vector<std::uint32_t> pool_;
  std::vector<std::vector<std::uint32_t>> returning_;
};

// True iff every run of w consecutive steps stays within the budget
// (budget-division kinds) or the population (population-division kinds).
inline bool window_budget_audit(const ProtocolTrace& trace) {
  const std::size_t w = std::max<std::size_t>(trace.w, 1);
  const bool by_population = is_population_division(trace.kind);
  const double cap = by_population ? trace.population : trace.epsilon;
  const double tol = by_population ? 1e-9 : 1e-12 * std::max(1.0, cap);
  const std::size_t n = trace.steps.size();
  for (std::size_t start = 0; start < n; ++start) {
    double window = 0.0;
    for (std::size_t i = start; i < std::min(n, start + w); ++i) {
      const auto& s = trace.steps[i];
      window += by_population ? s.population_used : s.budget_used;
    }
    if (window > cap + tol) return false;
  }
  return true;
}

inline void write_protocol_trace_csv(std::ostream& os,
                                     const ProtocolTrace& trace) {
  const std::size_t d =
      trace.steps.empty() ? 0 : trace.steps.front().release.size();
  os << "t,strategy,dis_bar,err,budget_used,population_used";
  for (std::size_t k = 0; k < d; ++k) os << ",release_" << k;
  os << '\n';
  for (const auto& s : trace.steps) {
    os << s.t << ',' << to_string(s.strategy) << ',' << s.dis_bar << ','
       << s.err << ',' << s.budget_used << ',' << s.population_used;
    for (double v : s.release) os << ',' << v;
    os << '\n';
  }
}

}  // namespace ldpstream
