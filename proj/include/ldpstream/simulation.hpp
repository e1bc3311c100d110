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
#include <optional>
#include <vector>

#include "ldpstream/attack_core.hpp"
#include "ldpstream/attacks.hpp"
#include "ldpstream/common.hpp"
#include "ldpstream/data.hpp"
#include "ldpstream/defense.hpp"
#include "ldpstream/freq_oracle.hpp"
#include "ldpstream/mean_mech.hpp"
#include "ldpstream/protocols.hpp"

namespace ldpstream {

// Genuine users of a categorical stream plus m fake users driven by an
// optional attacker. User ids >= n are fake.
class FrequencyWorld {
 public:
  FrequencyWorld(const CategoricalStream& stream, FoKind fo, std::int64_t m,
                 Attacker* attacker, std::uint64_t seed,
                 bool materialize_reports = false)
      : stream_(stream),
        fo_(fo),
        m_(m),
        attacker_(attacker),
        rng_(seed),
        materialize_(materialize_reports) {
    if (m < 0) throw InvalidConfigError("fake user count must be >= 0");
  }

  std::size_t population() const {
    return stream_.n + static_cast<std::size_t>(m_);
  }
  void set_time(std::size_t t) { t_ = t; }

  Collected collect(const CollectRequest& req) {
    const FoParams params = fo_params(fo_, req.epsilon, stream_.d);
    const auto row = stream_.slice(t_);
    std::vector<std::int64_t> counts(stream_.d, 0);
    std::vector<std::uint32_t> genuine;
    std::int64_t fakes = 0;
    const bool batch = req.want_batch || materialize_;
    if (req.all_users) {
      counts = stream_.counts(t_);
      fakes = m_;
    } else {
      for (std::uint32_t u : req.users) {
        if (u < stream_.n) {
          ++counts[row[u]];
          if (batch) genuine.push_back(u);
        } else {
          ++fakes;
        }
      }
    }
    std::optional<FakeAllocation> alloc;
    if (attacker_ != nullptr) {
      alloc = req.phase == Phase::kDissimilarity
                  ? attacker_->dissimilarity_allocation(params, fakes)
                  : attacker_->publication_allocation(params, fakes);
    }
    std::int64_t genuine_n = 0;
    for (auto c : counts) genuine_n += c;

    Collected out;
    std::vector<double> support;
    if (batch) {
      ReportBatch b;
      b.params = params;
      if (req.all_users) {
        for (std::size_t u = 0; u < stream_.n; ++u) {
          b.append(fo_perturb(params, row[u], rng_));
        }
      } else {
        for (std::uint32_t u : genuine) b.append(fo_perturb(params, row[u], rng_));
      }
      if (alloc && fakes > 0) {
        for (const auto& r : allocation_to_reports(*alloc, params, rng_)) {
          b.append(r);
        }
      }
      support = b.support_counts();
      out.reports = b.size();
      out.batch = std::move(b);
    } else {
      support = fo_perturb_counts(params, counts, rng_);
      out.reports = static_cast<std::size_t>(genuine_n);
      if (alloc && fakes > 0) {
        const auto fake = allocation_to_support(*alloc, params, rng_);
        for (std::size_t k = 0; k < support.size(); ++k) support[k] += fake[k];
        out.reports += static_cast<std::size_t>(std::llround(alloc->total));
      }
    }
    out.estimate =
        out.reports == 0
            ? FrequencyVector(stream_.d, 0.0)
            : fo_estimate(params, support, static_cast<double>(out.reports));
    return out;
  }

 private:
  const CategoricalStream& stream_;
  FoKind fo_;
  std::int64_t m_;
  Attacker* attacker_;
  Rng rng_;
  bool materialize_;
  std::size_t t_ = 0;
};

// Fake users for beta = m / (m + n).
inline std::int64_t fake_count_for_beta(double beta, std::size_t n) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw InvalidConfigError("beta must lie in [0, 1)");
  }
  return std::llround(beta * static_cast<double>(n) / (1.0 - beta));
}

struct FrequencyRunConfig {
  ProtocolConfig protocol;
  std::optional<AttackKind> attack;
  std::optional<ProtocolKind> attack_tuned_for;  // defaults to the protocol
  std::int64_t m = 0;
  KnowledgeMode knowledge = KnowledgeMode::kPartial;
  double rho = 0.01;
  double n_e_offset = 0.0;  // relative error of the attacker's n estimate
  std::optional<DefenseConfig> defense;
  bool materialize_reports = false;
  std::uint64_t seed = 1;
};

struct FrequencyRunResult {
  std::vector<FrequencyVector> releases;
  ProtocolTrace trace;
  std::vector<AttackTraceRow> attack_trace;
  std::vector<DefenseTraceRow> defense_trace;
  double dma_success_rate = std::nan("");
  double mse_attack = std::nan("");
  double mse_utility = std::nan("");
};

// Intercepted-report parameters an eavesdropper sees at each timestamp.
inline double intercept_epsilon(const ProtocolConfig& p) {
  if (has_dissimilarity_phase(p.kind)) {
    return is_population_division(p.kind)
               ? p.epsilon
               : p.epsilon / (2.0 * static_cast<double>(p.w));
  }
  return p.kind == ProtocolKind::kLbu ? p.epsilon / static_cast<double>(p.w)
                                      : p.epsilon;
}

inline std::vector<FrequencyVector> truth_stream(const CategoricalStream& s) {
  std::vector<FrequencyVector> out;
  out.reserve(s.T);
  for (std::size_t t = 0; t < s.T; ++t) out.push_back(s.frequencies(t));
  return out;
}

inline FrequencyRunResult run_frequency(
    const CategoricalStream& stream,
    const std::vector<FrequencyVector>& targets,
    const FrequencyRunConfig& cfg) {
  check_same_size(targets.size(), stream.T, "target stream length");
  ProtocolConfig pc = cfg.protocol;
  pc.estimator.task = Estimator::Task::kFrequency;
  pc.estimator.d = stream.d;
  const std::int64_t m = cfg.attack ? cfg.m : 0;
  const double n_e = static_cast<double>(stream.n) * (1.0 + cfg.n_e_offset);

  std::optional<Attacker> attacker;
  std::optional<KnowledgeEstimator> kest;
  if (cfg.attack) {
    AttackerConfig ac;
    ac.kind = *cfg.attack;
    ac.tuned_for = cfg.attack_tuned_for.value_or(pc.kind);
    ac.epsilon = pc.epsilon;
    ac.w = pc.w;
    ac.m = m;
    ac.estimator = pc.estimator;
    attacker.emplace(ac, n_e);
    kest.emplace(cfg.knowledge, cfg.rho, stream.n, n_e,
                 derive_seed(cfg.seed, 11));
  }
  std::optional<DefenseFilter> defense;
  if (cfg.defense) defense.emplace(*cfg.defense, derive_seed(cfg.seed, 13));

  FrequencyWorld world(stream, pc.estimator.fo, m,
                       attacker ? &*attacker : nullptr,
                       derive_seed(cfg.seed, 17),
                       cfg.materialize_reports || cfg.defense.has_value());
  Protocol protocol(pc, world.population(), uniform_vector(stream.d),
                    derive_seed(cfg.seed, 19));
  Rng knowledge_rng(derive_seed(cfg.seed, 23));
  const FoParams intercept =
      fo_params(pc.estimator.fo, intercept_epsilon(pc), stream.d);

  FrequencyRunResult res;
  res.trace.kind = pc.kind;
  res.trace.epsilon = pc.epsilon;
  res.trace.w = pc.w;
  res.trace.population = static_cast<double>(world.population());
  for (std::size_t t = 0; t < stream.T; ++t) {
    world.set_time(t);
    if (attacker) {
      attacker->begin_step(t, protocol.last_release(),
                           kest->estimate(stream, t, intercept, knowledge_rng),
                           targets[t]);
    }
    StepOutcome out = defense ? protocol.step(world, *defense)
                              : protocol.step(world);
    if (attacker) {
      attacker->end_step(out, mean_squared_distance(out.release, targets[t]));
    }
    res.releases.push_back(out.release);
    res.trace.steps.push_back(std::move(out));
  }
  const auto truth = truth_stream(stream);
  res.mse_attack = stream_mse(res.releases, targets);
  res.mse_utility = stream_mse(res.releases, truth);
  if (attacker) {
    res.attack_trace = attacker->trace();
    res.dma_success_rate = attacker->dma_success_rate();
  }
  if (defense) res.defense_trace = defense->trace();
  return res;
}

struct DefendedComparison {
  FrequencyRunResult undefended;
  FrequencyRunResult defended;
  double ag = std::nan("");
};

// Paired runs sharing every seed; AG = MSE(undefended) - MSE(defended)
// against the genuine frequencies.
inline DefendedComparison run_with_defense(
    const CategoricalStream& stream,
    const std::vector<FrequencyVector>& targets, FrequencyRunConfig cfg,
    const DefenseConfig& defense) {
  DefendedComparison out;
  cfg.materialize_reports = true;
  cfg.defense.reset();
  out.undefended = run_frequency(stream, targets, cfg);
  cfg.defense = defense;
  out.defended = run_frequency(stream, targets, cfg);
  const auto truth = truth_stream(stream);
  out.ag = accuracy_gain(out.undefended.releases, out.defended.releases, truth);
  double before = 0.0;
  double after = 0.0;
  std::size_t j = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    before += mean_squared_distance(out.undefended.releases[t], truth[t]);
    after += mean_squared_distance(out.defended.releases[t], truth[t]);
    auto& rows = out.defended.defense_trace;
    while (j < rows.size() && rows[j].t == t) {
      rows[j].ag_running = (before - after) / static_cast<double>(t + 1);
      ++j;
    }
  }
  return out;
}

// ---- Mean streams ----------------------------------------------------------

class MeanWorld {
 public:
  MeanWorld(const NumericStream& stream, std::int64_t m, MeanAttacker* attacker,
            std::uint64_t seed)
      : stream_(stream), m_(m), attacker_(attacker), rng_(seed) {}

  std::size_t population() const {
    return stream_.n + static_cast<std::size_t>(m_);
  }
  void set_time(std::size_t t) { t_ = t; }

  Collected collect(const CollectRequest& req) {
    MeanMechParams mp{MeanKind::kHm, req.epsilon, stream_.lo, stream_.hi};
    const auto row = stream_.slice(t_);
    double sum = 0.0;
    std::int64_t genuine = 0;
    std::int64_t fakes = 0;
    auto add = [&](std::size_t u) {
      sum += mean_perturb(mp, row[u], rng_);
      ++genuine;
    };
    if (req.all_users) {
      for (std::size_t u = 0; u < stream_.n; ++u) add(u);
      fakes = m_;
    } else {
      for (std::uint32_t u : req.users) {
        if (u < stream_.n) {
          add(u);
        } else {
          ++fakes;
        }
      }
    }
    std::int64_t fake_reports = 0;
    if (attacker_ != nullptr) {
      const auto z = req.phase == Phase::kDissimilarity
                         ? attacker_->dissimilarity_outputs(req.epsilon, fakes)
                         : attacker_->publication_outputs(req.epsilon, fakes);
      for (double v : z) sum += v;
      fake_reports = static_cast<std::int64_t>(z.size());
    }
    Collected out;
    out.reports = static_cast<std::size_t>(genuine + fake_reports);
    out.estimate = {out.reports == 0
                        ? 0.0
                        : sum / static_cast<double>(out.reports)};
    return out;
  }

 private:
  const NumericStream& stream_;
  std::int64_t m_;
  MeanAttacker* attacker_;
  Rng rng_;
  std::size_t t_ = 0;
};

struct MeanRunConfig {
  ProtocolConfig protocol;
  std::optional<AttackKind> attack;
  std::int64_t m = 0;
  std::uint64_t seed = 1;
};

struct MeanRunResult {
  std::vector<double> releases;
  std::vector<double> truth;
  ProtocolTrace trace;
  double dma_success_rate = std::nan("");
  double mse_attack = std::nan("");
  double mse_utility = std::nan("");
};

// Mean-estimation stream with the attacker holding exact sums of the genuine
// inputs.
inline MeanRunResult run_mean(const NumericStream& stream,
                              const std::vector<double>& targets,
                              const MeanRunConfig& cfg) {
  check_same_size(targets.size(), stream.T, "target stream length");
  ProtocolConfig pc = cfg.protocol;
  pc.estimator.task = Estimator::Task::kMean;
  const std::int64_t m = cfg.attack ? cfg.m : 0;
  std::optional<MeanAttacker> attacker;
  if (cfg.attack) {
    MeanAttackerConfig ac;
    ac.kind = *cfg.attack;
    ac.tuned_for = pc.kind;
    ac.epsilon = pc.epsilon;
    ac.w = pc.w;
    ac.m = m;
    ac.lo = stream.lo;
    ac.hi = stream.hi;
    attacker.emplace(ac, static_cast<double>(stream.n));
  }
  MeanWorld world(stream, m, attacker ? &*attacker : nullptr,
                  derive_seed(cfg.seed, 31));
  Protocol protocol(pc, world.population(),
                    FrequencyVector{(stream.lo + stream.hi) / 2.0},
                    derive_seed(cfg.seed, 37));
  MeanRunResult res;
  res.trace.kind = pc.kind;
  res.trace.epsilon = pc.epsilon;
  res.trace.w = pc.w;
  res.trace.population = static_cast<double>(world.population());
  double se = 0.0;
  double su = 0.0;
  for (std::size_t t = 0; t < stream.T; ++t) {
    world.set_time(t);
    const double mu = stream.mean(t);
    if (attacker) {
      MeanKnowledge kn;
      kn.n_e = static_cast<double>(stream.n);
      kn.s1_e = stream.sum(t);
      kn.s2 = stream.sum_squares(t);
      kn.mu = mu;
      attacker->begin_step(t, protocol.last_release()[0], kn, targets[t]);
    }
    StepOutcome out = protocol.step(world);
    if (attacker) attacker->end_step(out);
    const double r = out.release[0];
    res.releases.push_back(r);
    res.truth.push_back(mu);
    se += (r - targets[t]) * (r - targets[t]);
    su += (r - mu) * (r - mu);
    res.trace.steps.push_back(std::move(out));
  }
  res.mse_attack = se / static_cast<double>(stream.T);
  res.mse_utility = su / static_cast<double>(stream.T);
  if (attacker) res.dma_success_rate = attacker->dma_success_rate();
  return res;
}

}  // namespace ldpstream
