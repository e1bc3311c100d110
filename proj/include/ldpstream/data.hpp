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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ldpstream/common.hpp"

namespace ldpstream {

// n users x T timestamps of item indices, stored timestamp-major.
struct CategoricalStream {
  std::size_t n = 0;
  std::size_t T = 0;
  std::size_t d = 2;
  std::vector<std::uint16_t> values;

  std::uint16_t at(std::size_t user, std::size_t t) const {
    return values[t * n + user];
  }
  std::span<const std::uint16_t> slice(std::size_t t) const {
    return {values.data() + t * n, n};
  }
  std::vector<std::int64_t> counts(std::size_t t) const {
    std::vector<std::int64_t> c(d, 0);
    for (std::uint16_t v : slice(t)) ++c[v];
    return c;
  }
  FrequencyVector frequencies(std::size_t t) const {
    const auto c = counts(t);
    FrequencyVector f(d);
    for (std::size_t k = 0; k < d; ++k) {
      f[k] = static_cast<double>(c[k]) / static_cast<double>(n);
    }
    return f;
  }
};

struct NumericStream {
  std::size_t n = 0;
  std::size_t T = 0;
  double lo = -1.0;
  double hi = 1.0;
  std::vector<double> values;

  double at(std::size_t user, std::size_t t) const {
    return values[t * n + user];
  }
  std::span<const double> slice(std::size_t t) const {
    return {values.data() + t * n, n};
  }
  double sum(std::size_t t) const {
    double s = 0.0;
    for (double v : slice(t)) s += v;
    return s;
  }
  double sum_squares(std::size_t t) const {
    double s = 0.0;
    for (double v : slice(t)) s += v * v;
    return s;
  }
  double mean(std::size_t t) const { return sum(t) / static_cast<double>(n); }
};

enum class GeneratorModel { kLns, kSin, kLog, kPulse };

inline const char* to_string(GeneratorModel m) {
  switch (m) {
    case GeneratorModel::kLns:
      return "LNS";
    case GeneratorModel::kSin:
      return "Sin";
    case GeneratorModel::kLog:
      return "Log";
    case GeneratorModel::kPulse:
      return "Pulse";
  }
  return "?";
}

inline GeneratorModel parse_generator_model(std::string_view s) {
  for (auto m : {GeneratorModel::kLns, GeneratorModel::kSin,
                 GeneratorModel::kLog, GeneratorModel::kPulse}) {
    if (s == to_string(m)) return m;
  }
  throw InvalidConfigError("unknown generator model '" + std::string(s) + "'");
}

struct GeneratorConfig {
  GeneratorModel model = GeneratorModel::kLns;
  double p0 = 0.5;
  double noise_std = 0.025;
  double amplitude = std::nan("");  // A; model default when NaN
  double rate = 0.01;               // b
  double offset = 0.5;              // h
  std::uint64_t seed = 0;
};

inline double default_amplitude(GeneratorModel m) {
  return m == GeneratorModel::kLog ? 0.75 : 0.05;
}

// The probability process p_t, clipped to [0, 1].
inline std::vector<double> probability_process(const GeneratorConfig& cfg,
                                               std::size_t T) {
  Rng rng(derive_seed(cfg.seed, 101));
  const double a =
      std::isnan(cfg.amplitude) ? default_amplitude(cfg.model) : cfg.amplitude;
  std::vector<double> p(T);
  double prev = cfg.p0;
  std::normal_distribution<double> noise(0.0, cfg.noise_std);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t t = 0; t < T; ++t) {
    const double td = static_cast<double>(t);
    double v = 0.0;
    switch (cfg.model) {
      case GeneratorModel::kLns:
        v = t == 0 ? cfg.p0 : prev + noise(rng);
        break;
      case GeneratorModel::kSin:
        v = a * std::sin(cfg.rate * td) + cfg.offset;
        break;
      case GeneratorModel::kLog:
        v = a / (1.0 + std::exp(-cfg.rate * td));
        break;
      case GeneratorModel::kPulse:
        v = coin(rng) ? 1.0 : 0.0;
        break;
    }
    p[t] = std::clamp(v, 0.0, 1.0);
    prev = p[t];
  }
  return p;
}

// Binary stream: at each t exactly round(p_t * n) random users hold item 1.
inline CategoricalStream gen_synthetic(const GeneratorConfig& cfg,
                                       std::size_t n, std::size_t T) {
  if (n == 0 || T == 0) throw InvalidConfigError("n and T must be positive");
  const auto p = probability_process(cfg, T);
  Rng rng(derive_seed(cfg.seed, 102));
  CategoricalStream s;
  s.n = n;
  s.T = T;
  s.d = 2;
  s.values.assign(n * T, 0);
  std::vector<std::uint32_t> idx(n);
  for (std::size_t t = 0; t < T; ++t) {
    std::iota(idx.begin(), idx.end(), 0u);
    const auto ones = static_cast<std::size_t>(
        std::llround(p[t] * static_cast<double>(n)));
    for (std::size_t i = 0; i < ones; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(idx[i], idx[pick(rng)]);
      s.values[t * n + idx[i]] = 1;
    }
  }
  return s;
}

// Categorical stream over d > 2 items: each item weight follows its own
// clipped Gaussian random walk and the normalized weights are assigned to
// users by largest-remainder counts. d = 2 defers to gen_synthetic.
inline CategoricalStream gen_categorical(const GeneratorConfig& cfg,
                                         std::size_t n, std::size_t T,
                                         std::size_t d) {
  if (d < 2 || d > 65535) throw InvalidConfigError("d must be in [2, 65535]");
  if (d == 2) return gen_synthetic(cfg, n, T);
  if (n == 0 || T == 0) throw InvalidConfigError("n and T must be positive");
  Rng rng(derive_seed(cfg.seed, 103));
  std::normal_distribution<double> noise(0.0, cfg.noise_std);
  std::vector<double> weight(d, cfg.p0);
  CategoricalStream s;
  s.n = n;
  s.T = T;
  s.d = d;
  s.values.assign(n * T, 0);
  std::vector<std::uint32_t> idx(n);
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) {
      for (double& wk : weight) wk = std::clamp(wk + noise(rng), 0.0, 1.0);
    }
    double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    std::vector<double> share(d);
    for (std::size_t k = 0; k < d; ++k) {
      share[k] = total > 0.0 ? weight[k] / total * static_cast<double>(n)
                             : static_cast<double>(n) / static_cast<double>(d);
    }
    const auto counts =
        largest_remainder_round(share, static_cast<std::int64_t>(n));
    std::iota(idx.begin(), idx.end(), 0u);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < d; ++k) {
      for (std::int64_t j = 0; j < counts[k]; ++j) {
        s.values[t * n + idx[pos++]] = static_cast<std::uint16_t>(k);
      }
    }
  }
  return s;
}

// Numeric stream on [-1, 1]: per-timestamp mean 2 p_t - 1 scaled by
// `mean_scale`, plus per-user Gaussian spread, clipped to the domain.
inline NumericStream gen_numeric(const GeneratorConfig& cfg, std::size_t n,
                                 std::size_t T, double mean_scale = 0.5,
                                 double spread = 0.3) {
  if (n == 0 || T == 0) throw InvalidConfigError("n and T must be positive");
  const auto p = probability_process(cfg, T);
  Rng rng(derive_seed(cfg.seed, 104));
  std::normal_distribution<double> noise(0.0, spread);
  NumericStream s;
  s.n = n;
  s.T = T;
  s.values.resize(n * T);
  for (std::size_t t = 0; t < T; ++t) {
    const double mu = mean_scale * (2.0 * p[t] - 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      s.values[t * n + j] = std::clamp(mu + noise(rng), -1.0, 1.0);
    }
  }
  return s;
}

enum class TargetKind { kUniform, kPulse, kGaussian, kSigmoid };

inline const char* to_string(TargetKind k) {
  switch (k) {
    case TargetKind::kUniform:
      return "Uniform";
    case TargetKind::kPulse:
      return "Pulse";
    case TargetKind::kGaussian:
      return "Gaussian";
    case TargetKind::kSigmoid:
      return "Sigmoid";
  }
  return "?";
}

inline TargetKind parse_target_kind(std::string_view s) {
  for (auto k : {TargetKind::kUniform, TargetKind::kPulse,
                 TargetKind::kGaussian, TargetKind::kSigmoid}) {
    if (s == to_string(k)) return k;
  }
  throw InvalidConfigError("unknown target '" + std::string(s) + "'");
}

struct TargetOptions {
  bool pulse_random = false;  // seeded-random item instead of round-robin
  std::size_t sigmoid_item = 0;
  double gaussian_sigma = 0.5;
};

inline std::vector<FrequencyVector> gen_target(TargetKind kind, std::size_t d,
                                               std::size_t T,
                                               std::uint64_t seed,
                                               const TargetOptions& opt = {}) {
  if (d < 2) throw InvalidConfigError("target needs d >= 2");
  std::vector<FrequencyVector> out(T, FrequencyVector(d, 0.0));
  Rng rng(derive_seed(seed, 201));
  std::uniform_int_distribution<std::size_t> item(0, d - 1);
  const double dd = static_cast<double>(d);
  for (std::size_t t = 0; t < T; ++t) {
    FrequencyVector& f = out[t];
    const double td = static_cast<double>(t);
    switch (kind) {
      case TargetKind::kUniform:
        std::fill(f.begin(), f.end(), 1.0 / dd);
        break;
      case TargetKind::kPulse:
        f[opt.pulse_random ? item(rng) : t % d] = 1.0;
        break;
      case TargetKind::kGaussian: {
        const double sd = opt.gaussian_sigma * std::sqrt(td);
        const double half =
            3.0 * opt.gaussian_sigma * std::sqrt(static_cast<double>(T));
        auto cdf = [&](double x) {
          if (sd <= 0.0) return x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5);
          return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0)));
        };
        double total = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double a = -half + 2.0 * half * static_cast<double>(k) / dd;
          const double b = -half + 2.0 * half * static_cast<double>(k + 1) / dd;
          f[k] = cdf(b) - cdf(a);
          total += f[k];
        }
        for (double& v : f) v /= total;
        break;
      }
      case TargetKind::kSigmoid: {
        const double s = 2.0 / (1.0 + std::exp(-0.01 * td)) - 1.0;
        std::fill(f.begin(), f.end(), (1.0 - s) / (dd - 1.0));
        f[opt.sigmoid_item % d] = s;
        break;
      }
    }
  }
  return out;
}

class HoleError : public Error {
 public:
  HoleError(std::string msg, std::vector<std::pair<std::int64_t, std::size_t>>
                                 cells)
      : Error(std::move(msg)), cells_(std::move(cells)) {}
  const std::vector<std::pair<std::int64_t, std::size_t>>& cells() const {
    return cells_;
  }

 private:
  std::vector<std::pair<std::int64_t, std::size_t>> cells_;
};

class ParseError : public Error {
 public:
  ParseError(std::string msg, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CsvSchema {
  enum class ValueKind { kCategorical, kNumeric };
  enum class Normalization { kSymmetric, kZeroToB, kNone };
  ValueKind kind = ValueKind::kCategorical;
  bool has_header = true;
  // Raw category -> 1-based group. Empty means categories are already 1..d.
  std::map<std::int64_t, std::size_t> grouping;
  Normalization normalization = Normalization::kSymmetric;
  double bound_b = 1.0;
};

using IngestedStream = std::variant<CategoricalStream, NumericStream>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if constexpr (std::is_floating_point_v<T>) {
    // std::from_chars for double is available but strtod also accepts
    // the exponent forms produced by common exporters.
    std::string tmp(s);
    char* end = nullptr;
    out = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size();
  } else {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
  }
}

}  // namespace detail

// Reads rows (user_id, timestamp_index, value) into a rectangular stream.
inline IngestedStream ingest_csv(std::istream& in, const CsvSchema& schema) {
  struct Row {
    std::int64_t user;
    std::size_t t;
    double value;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  const bool categorical = schema.kind == CsvSchema::ValueKind::kCategorical;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && schema.has_header) continue;
    std::string_view sv = detail::trim(line);
    if (sv.empty()) continue;
    std::string_view fields[3];
    for (int i = 0; i < 3; ++i) {
      const auto comma = sv.find(',');
      if (i < 2 && comma == std::string_view::npos) {
        throw ParseError("expected 3 comma-separated fields", line_no);
      }
      fields[i] = i < 2 ? sv.substr(0, comma) : sv;
      if (i < 2) sv.remove_prefix(comma + 1);
    }
    if (fields[2].find(',') != std::string_view::npos) {
      throw ParseError("expected 3 comma-separated fields", line_no);
    }
    Row r{};
    std::int64_t t = 0;
    if (!detail::parse_number(fields[0], r.user)) {
      throw ParseError("user id is not an integer", line_no);
    }
    if (!detail::parse_number(fields[1], t) || t < 0) {
      throw ParseError("timestamp is not a non-negative integer", line_no);
    }
    r.t = static_cast<std::size_t>(t);
    if (categorical) {
      std::int64_t raw = 0;
      if (!detail::parse_number(fields[2], raw)) {
        throw ParseError("category is not an integer", line_no);
      }
      if (!schema.grouping.empty()) {
        const auto it = schema.grouping.find(raw);
        if (it == schema.grouping.end()) {
          throw ParseError("category " + std::to_string(raw) +
                               " missing from grouping map",
                           line_no);
        }
        raw = static_cast<std::int64_t>(it->second);
      }
      if (raw < 1 || raw > 65535) {
        throw ParseError("category must lie in [1, 65535]", line_no);
      }
      r.value = static_cast<double>(raw);
    } else {
      if (!detail::parse_number(fields[2], r.value) ||
          !std::isfinite(r.value)) {
        throw ParseError("value is not a finite number", line_no);
      }
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw EmptyInputError("CSV contains no data rows");

  std::map<std::int64_t, std::size_t> user_index;
  std::size_t T = 0;
  for (const Row& r : rows) {
    user_index.emplace(r.user, 0);
    T = std::max(T, r.t + 1);
  }
  std::size_t next = 0;
  for (auto& [id, idx] : user_index) idx = next++;
  const std::size_t n = user_index.size();
  std::vector<double> grid(n * T, std::nan(""));
  std::vector<char> seen(n * T, 0);
  for (const Row& r : rows) {
    const std::size_t cell = r.t * n + user_index[r.user];
    if (seen[cell]) {
      throw Error("duplicate cell for user " + std::to_string(r.user) +
                  " at t=" + std::to_string(r.t));
    }
    seen[cell] = 1;
    grid[cell] = r.value;
  }
  std::vector<std::pair<std::int64_t, std::size_t>> holes;
  for (const auto& [id, idx] : user_index) {
    for (std::size_t t = 0; t < T; ++t) {
      if (!seen[t * n + idx]) holes.emplace_back(id, t);
    }
  }
  if (!holes.empty()) {
    std::ostringstream msg;
    msg << "missing cells:";
    for (std::size_t i = 0; i < std::min<std::size_t>(holes.size(), 20); ++i) {
      msg << " (user=" << holes[i].first << ", t=" << holes[i].second << ")";
    }
    if (holes.size() > 20) msg << " ... " << holes.size() << " total";
    throw HoleError(msg.str(), std::move(holes));
  }

  if (categorical) {
    CategoricalStream s;
    s.n = n;
    s.T = T;
    double dmax = 0.0;
    for (double v : grid) dmax = std::max(dmax, v);
    s.d = std::max<std::size_t>(2, static_cast<std::size_t>(dmax));
    s.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      s.values[i] = static_cast<std::uint16_t>(grid[i] - 1.0);
    }
    return s;
  }
  NumericStream s;
  s.n = n;
  s.T = T;
  const auto [mn_it, mx_it] = std::minmax_element(grid.begin(), grid.end());
  const double mn = *mn_it;
  const double mx = *mx_it;
  const double span = mx > mn ? mx - mn : 1.0;
  s.values.resize(grid.size());
  switch (schema.normalization) {
    case CsvSchema::Normalization::kSymmetric:
      s.lo = -1.0;
      s.hi = 1.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        s.values[i] = mx > mn ? 2.0 * (grid[i] - mn) / span - 1.0 : 0.0;
      }
      break;
    case CsvSchema::Normalization::kZeroToB:
      s.lo = 0.0;
      s.hi = schema.bound_b;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        s.values[i] = mx > mn ? schema.bound_b * (grid[i] - mn) / span : 0.0;
      }
      break;
    case CsvSchema::Normalization::kNone:
      s.lo = mn;
      s.hi = mx > mn ? mx : mn + 1.0;
      s.values = grid;
      break;
  }
  return s;
}

inline IngestedStream ingest_csv(const std::string& path,
                                 const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return ingest_csv(in, schema);
}

}  // namespace ldpstream
