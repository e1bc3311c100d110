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
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "ldpstream/common.hpp"
#include "ldpstream/freq_oracle.hpp"
#include "ldpstream/protocols.hpp"

namespace ldpstream {

struct DefenseConfig {
  double r = 0.5;
  std::size_t s = 20;
  std::size_t trees = 100;
  std::size_t subsample_size = 16;
  double ks_alpha = 0.05;
};

inline void validate_defense_config(const DefenseConfig& c, double reports) {
  if (!(c.r > 0.0 && c.r < 1.0 + 1e-12)) {
    throw InvalidConfigError("subsample fraction r must lie in (0, 1]");
  }
  if (c.s < 2) throw InvalidConfigError("need at least two subsets");
  if (c.trees < 1 || c.subsample_size < 2) {
    throw InvalidConfigError("isolation forest needs trees and samples");
  }
  if (!(c.ks_alpha > 0.0 && c.ks_alpha < 1.0)) {
    throw InvalidConfigError("KS significance must lie in (0, 1)");
  }
  if (reports >= 0.0 && c.r * reports < 1.0) {
    throw InvalidConfigError("subsets would be empty");
  }
}

inline std::size_t subset_size(double r, std::size_t total) {
  return std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(r * static_cast<double>(total))),
      1, std::max<std::size_t>(total, 1));
}

// s re-estimates, each from a uniform subset (without replacement) of
// round(r * N) reports.
inline std::vector<FrequencyVector> subsample_estimates(
    const ReportBatch& batch, double r, std::size_t s, Rng& rng) {
  const std::size_t total = batch.size();
  if (total == 0) throw EmptyInputError("no reports to subsample");
  const std::size_t k = subset_size(r, total);
  std::vector<std::uint32_t> idx(total);
  std::vector<FrequencyVector> out;
  out.reserve(s);
  for (std::size_t j = 0; j < s; ++j) {
    std::iota(idx.begin(), idx.end(), 0u);
    std::vector<double> support(batch.params.d, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, total - 1);
      std::swap(idx[i], idx[pick(rng)]);
      batch.add_support(idx[i], support);
    }
    out.push_back(fo_estimate(batch.params, support, static_cast<double>(k)));
  }
  return out;
}

inline std::vector<FrequencyVector> subsample_estimates(
    std::span<const FoReport> reports, const FoParams& params, double r,
    std::size_t s, Rng& rng) {
  ReportBatch batch;
  batch.params = params;
  for (const auto& rep : reports) batch.append(rep);
  return subsample_estimates(batch, r, s, rng);
}

// Expected path length of an unsuccessful search in a binary search tree.
inline double iforest_c(double n) {
  if (n <= 1.0) return 0.0;
  if (n < 2.5) return 1.0;
  constexpr double kEuler = 0.5772156649015329;
  return 2.0 * (std::log(n - 1.0) + kEuler) - 2.0 * (n - 1.0) / n;
}

class IsolationForest {
 public:
  void fit(const std::vector<FrequencyVector>& data, std::size_t trees,
           std::size_t subsample, Rng& rng) {
    if (data.empty()) throw EmptyInputError("isolation forest needs data");
    dim_ = data.front().size();
    for (const auto& v : data) check_same_size(v.size(), dim_, "iforest");
    psi_ = std::min(subsample, data.size());
    max_depth_ = static_cast<std::size_t>(
        std::ceil(std::log2(std::max<double>(2.0, static_cast<double>(psi_)))));
    trees_.clear();
    std::vector<std::uint32_t> all(data.size());
    for (std::size_t t = 0; t < trees; ++t) {
      std::iota(all.begin(), all.end(), 0u);
      std::vector<std::uint32_t> pool = all;
      std::vector<std::uint32_t> sample = take_random(pool, psi_, rng);
      Tree tree;
      build(tree, data, sample, 0, rng);
      trees_.push_back(std::move(tree));
    }
  }

  double path_length(std::span<const double> x) const {
    double total = 0.0;
    for (const auto& tree : trees_) {
      std::size_t node = 0;
      std::size_t depth = 0;
      while (!tree[node].leaf) {
        node = x[tree[node].attr] < tree[node].split ? tree[node].left
                                                     : tree[node].right;
        ++depth;
      }
      total += static_cast<double>(depth) +
               iforest_c(static_cast<double>(tree[node].size));
    }
    return total / static_cast<double>(trees_.size());
  }

  // Standard anomaly score in (0, 1]; larger is more anomalous.
  double anomaly_score(std::span<const double> x) const {
    const double c = iforest_c(static_cast<double>(psi_));
    if (c <= 0.0) return 0.5;
    return std::pow(2.0, -path_length(x) / c);
  }

 private:
  struct Node {
    bool leaf = true;
    std::size_t attr = 0;
    double split = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    std::size_t size = 0;
  };
  using Tree = std::vector<Node>;

  std::size_t build(Tree& tree, const std::vector<FrequencyVector>& data,
                    std::vector<std::uint32_t>& rows, std::size_t depth,
                    Rng& rng) {
    const std::size_t id = tree.size();
    tree.push_back(Node{});
    tree[id].size = rows.size();
    if (rows.size() <= 1 || depth >= max_depth_) return id;
    // Only attributes with spread can split.
    std::vector<std::size_t> attrs;
    std::vector<std::pair<double, double>> ranges;
    for (std::size_t a = 0; a < dim_; ++a) {
      double lo = kInfinity;
      double hi = -kInfinity;
      for (auto r : rows) {
        lo = std::min(lo, data[r][a]);
        hi = std::max(hi, data[r][a]);
      }
      if (hi > lo) {
        attrs.push_back(a);
        ranges.emplace_back(lo, hi);
      }
    }
    if (attrs.empty()) return id;
    std::uniform_int_distribution<std::size_t> pick(0, attrs.size() - 1);
    const std::size_t j = pick(rng);
    std::uniform_real_distribution<double> cut(ranges[j].first,
                                               ranges[j].second);
    double split = cut(rng);
    if (split <= ranges[j].first) split = std::nextafter(ranges[j].first, kInfinity);
    const std::size_t a = attrs[j];
    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
    for (auto r : rows) (data[r][a] < split ? left : right).push_back(r);
    tree[id].leaf = false;
    tree[id].attr = a;
    tree[id].split = split;
    const std::size_t l = build(tree, data, left, depth + 1, rng);
    const std::size_t rr = build(tree, data, right, depth + 1, rng);
    tree[id].left = l;
    tree[id].right = rr;
    return id;
  }

  std::size_t dim_ = 0;
  std::size_t psi_ = 0;
  std::size_t max_depth_ = 0;
  std::vector<Tree> trees_;
};

// Larger score means less anomalous.
inline std::vector<double> iforest_scores(
    const std::vector<FrequencyVector>& vectors, const DefenseConfig& cfg,
    Rng& rng) {
  IsolationForest forest;
  forest.fit(vectors, cfg.trees, cfg.subsample_size, rng);
  std::vector<double> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(1.0 - forest.anomaly_score(v));
  return out;
}

inline FrequencyVector defended_release(
    const std::vector<FrequencyVector>& estimates,
    std::span<const double> scores) {
  if (estimates.empty()) throw EmptyInputError("no estimates to release");
  check_same_size(estimates.size(), scores.size(), "defended_release");
  return estimates[argmax_index(scores)];
}

struct KsResult {
  double statistic = 0.0;
  double critical = 0.0;
  bool detected = false;
};

inline FrequencyVector clip_renormalize(std::span<const double> f) {
  FrequencyVector out(f.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    out[k] = std::max(0.0, f[k]);
    sum += out[k];
  }
  if (!(sum > 0.0)) return uniform_vector(f.size());
  for (double& v : out) v /= sum;
  return out;
}

inline double ks_critical_value(double alpha, double n_a, double n_b) {
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) *
         std::sqrt((n_a + n_b) / (n_a * n_b));
}

// Two-sample KS over the discrete CDFs of two frequency estimates;
// detected = the estimates look inconsistent at level alpha.
inline KsResult ks_consistency(std::span<const double> est_a,
                               std::span<const double> est_b,
                               double effective_n_a, double effective_n_b,
                               double alpha) {
  check_same_size(est_a.size(), est_b.size(), "ks_consistency");
  if (!(effective_n_a > 0.0) || !(effective_n_b > 0.0)) {
    throw InvalidConfigError("KS sample sizes must be positive");
  }
  const auto a = clip_renormalize(est_a);
  const auto b = clip_renormalize(est_b);
  KsResult res;
  double ca = 0.0;
  double cb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ca += a[k];
    cb += b[k];
    res.statistic = std::max(res.statistic, std::abs(ca - cb));
  }
  res.critical = ks_critical_value(alpha, effective_n_a, effective_n_b);
  res.detected = res.statistic > res.critical;
  return res;
}

// Sample size whose empirical-CDF noise matches an FO estimate's: the
// report count capped at 1 / (2 d Var(n, eps)).
inline double effective_sample_size(const Estimator& est, double n,
                                    double epsilon) {
  const double v = est.variance(n, epsilon);
  if (!std::isfinite(v) || !(v > 0.0)) return n;
  return std::min(n, 1.0 / (2.0 * static_cast<double>(est.dim()) * v));
}

inline double stream_mse(const std::vector<FrequencyVector>& a,
                         const std::vector<FrequencyVector>& b) {
  check_same_size(a.size(), b.size(), "stream length");
  if (a.empty()) throw EmptyInputError("empty stream");
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    s += mean_squared_distance(a[t], b[t]);
  }
  return s / static_cast<double>(a.size());
}

inline double accuracy_gain(const std::vector<FrequencyVector>& before,
                            const std::vector<FrequencyVector>& after,
                            const std::vector<FrequencyVector>& truth) {
  return stream_mse(before, truth) - stream_mse(after, truth);
}

struct DefenseTraceRow {
  std::size_t t = 0;
  bool detected = false;
  double chosen_subset_score = std::nan("");
  double ag_running = std::nan("");
};

// Publication filter: KS-check the phase-1 estimate against the publication
// and, when they disagree, release the least anomalous subset re-estimate.
class DefenseFilter {
 public:
  DefenseFilter(DefenseConfig cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(seed) {
    validate_defense_config(cfg_, -1.0);
  }

  bool wants_batch() const { return true; }

  FrequencyVector operator()(const PublicationContext& ctx) {
    DefenseTraceRow row;
    row.t = ctx.t;
    const Collected& pub = *ctx.published;
    if (ctx.f_bar != nullptr && ctx.reports_1 > 0.0 && ctx.reports_2 > 0.0) {
      const double na =
          effective_sample_size(*ctx.estimator, ctx.reports_1, ctx.epsilon_1);
      const double nb =
          effective_sample_size(*ctx.estimator, ctx.reports_2, ctx.epsilon_2);
      row.detected =
          ks_consistency(*ctx.f_bar, pub.estimate, na, nb, cfg_.ks_alpha)
              .detected;
    }
    FrequencyVector release = pub.estimate;
    if (row.detected && pub.batch && pub.batch->size() > 0) {
      const auto ests = subsample_estimates(*pub.batch, cfg_.r, cfg_.s, rng_);
      const auto scores = iforest_scores(ests, cfg_, rng_);
      const std::size_t best = argmax_index(scores);
      row.chosen_subset_score = scores[best];
      release = ests[best];
    }
    rows_.push_back(row);
    return release;
  }

  const DefenseConfig& config() const { return cfg_; }
  std::vector<DefenseTraceRow>& trace() { return rows_; }
  const std::vector<DefenseTraceRow>& trace() const { return rows_; }

 private:
  DefenseConfig cfg_;
  Rng rng_;
  std::vector<DefenseTraceRow> rows_;
};

inline void write_defense_trace_csv(std::ostream& os,
                                    const std::vector<DefenseTraceRow>& rows) {
  os << "t,detected,chosen_subset_score,AG_running\n";
  for (const auto& r : rows) {
    os << r.t << ',' << (r.detected ? 1 : 0) << ',' << r.chosen_subset_score
       << ',' << r.ag_running << '\n';
  }
}

}  // namespace ldpstream
