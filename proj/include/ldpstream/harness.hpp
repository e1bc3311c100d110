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
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ldpstream/attack_core.hpp"
#include "ldpstream/attacks.hpp"
#include "ldpstream/common.hpp"
#include "ldpstream/data.hpp"
#include "ldpstream/defense.hpp"
#include "ldpstream/freq_oracle.hpp"
#include "ldpstream/protocols.hpp"
#include "ldpstream/simulation.hpp"

namespace ldpstream {

inline constexpr const char* kMetricsCsvVersion = "# ldpstream-metrics v1";

struct ExperimentConfig {
  ProtocolKind protocol = ProtocolKind::kLbd;
  FoKind fo = FoKind::kAda;
  std::optional<AttackKind> attack = AttackKind::kOaa;
  std::optional<ProtocolKind> attack_tuned_for;
  bool defense = false;
  DefenseConfig defense_config;
  double epsilon = 1.0;
  std::size_t w = 20;
  std::optional<double> beta;  // default depends on the target
  std::size_t n = 100000;
  std::size_t T = 200;
  std::size_t d = 2;
  TargetKind target = TargetKind::kGaussian;
  TargetOptions target_options;
  GeneratorModel model = GeneratorModel::kLns;
  KnowledgeMode knowledge = KnowledgeMode::kPartial;
  double n_e_offset = 0.0;
  double rho = 0.01;
  std::vector<std::uint64_t> seeds = {1};
  bool timing = true;
};

inline double default_beta(TargetKind t) {
  return t == TargetKind::kPulse || t == TargetKind::kSigmoid ? 0.3 : 0.2;
}

inline double effective_beta(const ExperimentConfig& c) {
  return c.beta.value_or(default_beta(c.target));
}

inline void validate_experiment(const ExperimentConfig& c) {
  if (!(c.epsilon > 0.0)) throw InvalidConfigError("epsilon must be positive");
  if (c.w < 1) throw InvalidConfigError("w must be >= 1");
  if (c.n < 1 || c.T < 1) throw InvalidConfigError("n and T must be >= 1");
  if (c.d < 2) throw InvalidConfigError("d must be >= 2");
  if (c.d > 65535) throw InvalidConfigError("d too large");
  const double b = effective_beta(c);
  if (!(b >= 0.0 && b < 1.0)) throw InvalidConfigError("beta must be in [0,1)");
  if (c.n_e_offset <= -1.0) throw InvalidConfigError("n_e offset must be > -1");
  if (c.knowledge != KnowledgeMode::kFull && !(c.rho > 0.0 && c.rho <= 1.0)) {
    throw InvalidConfigError("rho must lie in (0, 1]");
  }
  if (c.seeds.empty()) throw InvalidConfigError("no seeds");
  if (c.defense) validate_defense_config(c.defense_config, -1.0);
}

struct MetricsRow {
  std::size_t run_id = 0;
  std::string seed;  // "all" on aggregate rows
  std::string protocol;
  std::string attack;
  double epsilon = 0.0;
  std::size_t w = 0;
  double beta = 0.0;
  std::string target;
  std::string knowledge;
  std::size_t d = 0;
  std::size_t n = 0;
  std::size_t T = 0;
  double mse_attack = std::nan("");
  double mse_utility = std::nan("");
  double dma_success_rate = std::nan("");
  double ag = std::nan("");
  double bound_lo = std::nan("");
  double bound_hi = std::nan("");
  double wall_ms = 0.0;
  bool m_insufficient = false;  // not serialized
};

inline CategoricalStream make_stream(const ExperimentConfig& c,
                                     std::uint64_t seed) {
  GeneratorConfig g;
  g.model = c.model;
  g.seed = derive_seed(seed, 1);
  return c.d == 2 ? gen_synthetic(g, c.n, c.T) : gen_categorical(g, c.n, c.T, c.d);
}

inline std::vector<FrequencyVector> make_targets(const ExperimentConfig& c,
                                                 std::uint64_t seed) {
  return gen_target(c.target, c.d, c.T, derive_seed(seed, 2),
                    c.target_options);
}

// Stream-averaged expected gap at exact knowledge, for the bound tables.
inline GapFunction averaged_gap(const CategoricalStream& stream,
                                const std::vector<FrequencyVector>& targets,
                                FoKind fo, bool output) {
  return [&stream, &targets, fo, output](double m, double n, double eps) {
    if (!(eps > 0.0)) return kInfinity;
    double total = 0.0;
    for (std::size_t t = 0; t < stream.T; ++t) {
      const FrequencyVector f = stream.frequencies(t);
      Knowledge kn{n, f};
      if (output) {
        const FoParams params = fo_params(fo, eps, stream.d);
        const auto x = opma_solve_continuous(kn, targets[t], m, params);
        total += opma_gap(x, n, f, targets[t], params, m).value();
      } else {
        const auto x = ipma_solve_continuous(kn, targets[t], m);
        total += ipma_gap(x, n, f, targets[t], fo, eps, m).value();
      }
    }
    return total / static_cast<double>(stream.T);
  };
}

inline SamplingTerms sampling_terms(const std::vector<FrequencyVector>& targets,
                                    const std::vector<FrequencyVector>& releases,
                                    std::size_t w) {
  SamplingTerms s;
  const std::size_t T = targets.size();
  if (T == 0) return s;
  std::size_t slots = 0;
  double tail = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    if (t % w == 0) {
      ++slots;
    } else {
      tail += mean_squared_distance(targets[t], releases[t - t % w]);
    }
  }
  s.sampling_fraction = static_cast<double>(slots) / static_cast<double>(T);
  s.tail_mean = tail / static_cast<double>(T);
  return s;
}

// Largest fake-user count the sufficient condition asks for over the stream.
inline double required_fake_users(const CategoricalStream& stream,
                                  const std::vector<FrequencyVector>& targets,
                                  FoKind fo, double epsilon, bool output) {
  double need = 0.0;
  const FoParams params = fo_params(fo, epsilon, stream.d);
  for (std::size_t t = 0; t < stream.T; ++t) {
    const FrequencyVector f = stream.frequencies(t);
    const double n = static_cast<double>(stream.n);
    need = std::max(need, output ? opma_sufficient_m(n, f, targets[t], params)
                                 : ipma_sufficient_m(n, f, targets[t]));
  }
  return need;
}

inline MetricsRow run_single(const ExperimentConfig& c, std::size_t run_id,
                             std::uint64_t seed,
                             FrequencyRunResult* keep = nullptr) {
  validate_experiment(c);
  const auto start = std::chrono::steady_clock::now();
  const CategoricalStream stream = make_stream(c, seed);
  const auto targets = make_targets(c, seed);

  FrequencyRunConfig rc;
  rc.protocol.kind = c.protocol;
  rc.protocol.epsilon = c.epsilon;
  rc.protocol.w = c.w;
  rc.protocol.estimator.fo = c.fo;
  rc.protocol.estimator.d = c.d;
  rc.attack = c.attack;
  rc.attack_tuned_for = c.attack_tuned_for;
  rc.m = fake_count_for_beta(effective_beta(c), c.n);
  rc.knowledge = c.knowledge;
  rc.rho = c.rho;
  rc.n_e_offset = c.n_e_offset;
  rc.seed = derive_seed(seed, 3);

  MetricsRow row;
  row.run_id = run_id;
  row.seed = std::to_string(seed);
  row.protocol = to_string(c.protocol);
  row.attack = c.attack ? to_string(*c.attack) : "none";
  row.epsilon = c.epsilon;
  row.w = c.w;
  row.beta = effective_beta(c);
  row.target = to_string(c.target);
  row.knowledge = to_string(c.knowledge);
  row.d = c.d;
  row.n = c.n;
  row.T = c.T;

  FrequencyRunResult run;
  if (c.defense) {
    auto cmp = run_with_defense(stream, targets, rc, c.defense_config);
    row.ag = cmp.ag;
    run = std::move(cmp.defended);
  } else {
    run = run_frequency(stream, targets, rc);
  }
  row.mse_attack = run.mse_attack;
  row.mse_utility = run.mse_utility;
  row.dma_success_rate = run.dma_success_rate;

  if (c.attack && rc.m > 0) {
    const bool output = is_output_attack(*c.attack);
    const double m = static_cast<double>(rc.m);
    const double n = static_cast<double>(c.n);
    const auto gap = averaged_gap(stream, targets, c.fo, output);
    const auto b = bound_table(c.protocol, *c.attack, m, n, c.epsilon, c.w, gap,
                               sampling_terms(targets, run.releases, c.w));
    if (b.available) {
      row.bound_lo = std::min(b.lo, b.hi);
      row.bound_hi = std::max(b.lo, b.hi);
    }
    row.m_insufficient =
        required_fake_users(stream, targets, c.fo, c.epsilon, output) > m;
  }
  if (keep != nullptr) *keep = std::move(run);
  if (c.timing) {
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  }
  return row;
}

inline double nan_mean(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t k = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    s += x;
    ++k;
  }
  return k == 0 ? std::nan("") : s / static_cast<double>(k);
}

inline MetricsRow aggregate_rows(const std::vector<MetricsRow>& rows) {
  if (rows.empty()) throw EmptyInputError("nothing to aggregate");
  MetricsRow a = rows.front();
  a.seed = "all";
  auto collect = [&](double MetricsRow::*f) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.*f);
    return nan_mean(v);
  };
  a.mse_attack = collect(&MetricsRow::mse_attack);
  a.mse_utility = collect(&MetricsRow::mse_utility);
  a.dma_success_rate = collect(&MetricsRow::dma_success_rate);
  a.ag = collect(&MetricsRow::ag);
  a.bound_lo = collect(&MetricsRow::bound_lo);
  a.bound_hi = collect(&MetricsRow::bound_hi);
  a.wall_ms = 0.0;
  a.m_insufficient = false;
  for (const auto& r : rows) {
    a.wall_ms += r.wall_ms;
    a.m_insufficient = a.m_insufficient || r.m_insufficient;
  }
  return a;
}

// Runs fn(i) for i in [0, count) on `threads` workers.
inline void parallel_for(std::size_t count, std::size_t threads,
                         const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < threads; ++k) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// One row per (config, seed), each config followed by its aggregate row.
inline std::vector<MetricsRow> run_grid(const std::vector<ExperimentConfig>& configs,
                                        std::size_t threads = 1) {
  for (const auto& c : configs) validate_experiment(c);
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    for (std::size_t s = 0; s < configs[i].seeds.size(); ++s) {
      tasks.emplace_back(i, s);
    }
  }
  std::vector<MetricsRow> results(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t k) {
    const auto [i, s] = tasks[k];
    results[k] = run_single(configs[i], i, configs[i].seeds[s]);
  });
  std::vector<MetricsRow> out;
  std::size_t k = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::vector<MetricsRow> mine;
    for (std::size_t s = 0; s < configs[i].seeds.size(); ++s) {
      mine.push_back(results[k++]);
    }
    out.insert(out.end(), mine.begin(), mine.end());
    out.push_back(aggregate_rows(mine));
  }
  return out;
}

inline std::vector<MetricsRow> run_experiment(const ExperimentConfig& c,
                                              std::size_t threads = 1) {
  return run_grid({c}, threads);
}

// Sweep axes; an empty axis keeps the base value.
struct GridSpec {
  std::vector<double> epsilon;
  std::vector<std::size_t> w;
  std::vector<double> beta;
  std::vector<double> n_e_offset;
  std::vector<double> rho;
  std::vector<std::size_t> d;
  std::vector<ProtocolKind> protocol;
  std::vector<std::optional<AttackKind>> attack;
};

inline std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base,
                                                 const GridSpec& g) {
  std::vector<ExperimentConfig> out{base};
  auto axis = [&out](const auto& values, auto setter) {
    if (values.empty()) return;
    std::vector<ExperimentConfig> next;
    for (const auto& c : out) {
      for (const auto& v : values) {
        ExperimentConfig x = c;
        setter(x, v);
        next.push_back(std::move(x));
      }
    }
    out = std::move(next);
  };
  axis(g.protocol, [](ExperimentConfig& c, ProtocolKind v) { c.protocol = v; });
  axis(g.attack,
       [](ExperimentConfig& c, std::optional<AttackKind> v) { c.attack = v; });
  axis(g.epsilon, [](ExperimentConfig& c, double v) { c.epsilon = v; });
  axis(g.w, [](ExperimentConfig& c, std::size_t v) { c.w = v; });
  axis(g.beta, [](ExperimentConfig& c, double v) { c.beta = v; });
  axis(g.n_e_offset, [](ExperimentConfig& c, double v) { c.n_e_offset = v; });
  axis(g.rho, [](ExperimentConfig& c, double v) { c.rho = v; });
  axis(g.d, [](ExperimentConfig& c, std::size_t v) { c.d = v; });
  return out;
}

// ---- CSV -------------------------------------------------------------------

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

inline void write_metrics_csv(std::ostream& os,
                              const std::vector<MetricsRow>& rows) {
  os << kMetricsCsvVersion << '\n'
     << "run_id,seed,protocol,attack,epsilon,w,beta,target,knowledge,d,n,T,"
        "mse_attack,mse_utility,dma_success_rate,ag,bound_lo,bound_hi,"
        "wall_ms\n";
  for (const auto& r : rows) {
    os << r.run_id << ',' << r.seed << ',' << r.protocol << ',' << r.attack
       << ',' << format_double(r.epsilon) << ',' << r.w << ','
       << format_double(r.beta) << ',' << r.target << ',' << r.knowledge
       << ',' << r.d << ',' << r.n << ',' << r.T << ','
       << format_double(r.mse_attack) << ',' << format_double(r.mse_utility)
       << ',' << format_double(r.dma_success_rate) << ','
       << format_double(r.ag) << ',' << format_double(r.bound_lo) << ','
       << format_double(r.bound_hi) << ',' << format_double(r.wall_ms)
       << '\n';
  }
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ParseError("bad number '" + s + "'", line);
  }
  return v;
}

inline std::size_t parse_size(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ParseError("bad integer '" + s + "'", line);
  }
  return static_cast<std::size_t>(v);
}

inline std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::string line;
  std::size_t no = 1;
  if (!std::getline(in, line) || line != kMetricsCsvVersion) {
    throw ParseError("missing or unknown metrics CSV version line", no);
  }
  ++no;
  if (!std::getline(in, line)) throw ParseError("missing header", no);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 19) throw ParseError("expected 19 fields", no);
    MetricsRow r;
    r.run_id = parse_size(f[0], no);
    r.seed = f[1];
    r.protocol = f[2];
    r.attack = f[3];
    r.epsilon = parse_double(f[4], no);
    r.w = parse_size(f[5], no);
    r.beta = parse_double(f[6], no);
    r.target = f[7];
    r.knowledge = f[8];
    r.d = parse_size(f[9], no);
    r.n = parse_size(f[10], no);
    r.T = parse_size(f[11], no);
    r.mse_attack = parse_double(f[12], no);
    r.mse_utility = parse_double(f[13], no);
    r.dma_success_rate = parse_double(f[14], no);
    r.ag = parse_double(f[15], no);
    r.bound_lo = parse_double(f[16], no);
    r.bound_hi = parse_double(f[17], no);
    r.wall_ms = parse_double(f[18], no);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---- Mismatch matrix ------------------------------------------------------

struct MismatchCell {
  ProtocolKind protocol;
  ProtocolKind tuned_for;
  double mse_attack = std::nan("");
  bool diagonal = false;
};

// Attack tuned for protocol Y run against protocol X, averaged over seeds.
inline std::vector<MismatchCell> mismatch_matrix(
    const std::vector<ProtocolKind>& protocols,
    const std::vector<ProtocolKind>& tuned_for, const ExperimentConfig& base,
    std::size_t threads = 1) {
  std::vector<ExperimentConfig> configs;
  for (auto x : protocols) {
    for (auto y : tuned_for) {
      ExperimentConfig c = base;
      c.protocol = x;
      c.attack_tuned_for = y;
      c.defense = false;
      configs.push_back(c);
    }
  }
  const auto rows = run_grid(configs, threads);
  std::vector<MismatchCell> out;
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.seed != "all") continue;
    const auto& c = configs[i++];
    out.push_back({c.protocol, *c.attack_tuned_for, r.mse_attack,
                   c.protocol == *c.attack_tuned_for});
  }
  return out;
}

inline void write_mismatch_csv(std::ostream& os,
                               const std::vector<MismatchCell>& cells) {
  os << "# ldpstream-mismatch v1\nprotocol,tuned_for,mse_attack,diagonal\n";
  for (const auto& c : cells) {
    os << to_string(c.protocol) << ',' << to_string(c.tuned_for) << ','
       << format_double(c.mse_attack) << ',' << (c.diagonal ? 1 : 0) << '\n';
  }
}

// ---- Config file -----------------------------------------------------------
//
//   [experiment]
//   protocol = LBD
//   attack = OAA            # or none
//   seeds = 1,2,3
//   [defense]
//   enabled = true
//   r = 0.5
//   [grid]
//   epsilon = 0.5, 1, 2

struct ConfigFile {
  ExperimentConfig base;
  GridSpec grid;
};

inline std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  for (auto& s : split(v, ',')) {
    const auto t = detail::trim(s);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline bool parse_bool(std::string_view v, std::size_t line) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ParseError("bad boolean '" + std::string(v) + "'", line);
}

inline std::optional<AttackKind> parse_attack_or_none(std::string_view v) {
  if (v == "none") return std::nullopt;
  return parse_attack_kind(v);
}

inline FoKind parse_fo_kind(std::string_view v) {
  for (auto k : {FoKind::kKrr, FoKind::kOue, FoKind::kAda}) {
    if (v == to_string(k)) return k;
  }
  throw InvalidConfigError("unknown frequency oracle '" + std::string(v) + "'");
}

inline std::vector<std::uint64_t> parse_seeds(std::string_view v,
                                              std::size_t line) {
  std::vector<std::uint64_t> out;
  for (const auto& s : split_list(v)) {
    const auto dash = s.find('-');
    if (dash != std::string::npos && dash > 0) {
      const auto lo = parse_size(s.substr(0, dash), line);
      const auto hi = parse_size(s.substr(dash + 1), line);
      for (auto x = lo; x <= hi; ++x) out.push_back(x);
    } else {
      out.push_back(parse_size(s, line));
    }
  }
  return out;
}

// Applies one experiment key; shared by the config reader and CLI overrides.
inline void apply_experiment_key(ExperimentConfig& c, std::string_view key,
                                 std::string_view v, std::size_t line = 0) {
  const std::string s(v);
  if (key == "protocol") {
    c.protocol = parse_protocol_kind(v);
  } else if (key == "fo") {
    c.fo = parse_fo_kind(v);
  } else if (key == "attack") {
    c.attack = parse_attack_or_none(v);
  } else if (key == "tuned_for") {
    c.attack_tuned_for = parse_protocol_kind(v);
  } else if (key == "epsilon") {
    c.epsilon = parse_double(s, line);
  } else if (key == "w") {
    c.w = parse_size(s, line);
  } else if (key == "beta") {
    c.beta = parse_double(s, line);
  } else if (key == "n") {
    c.n = parse_size(s, line);
  } else if (key == "T") {
    c.T = parse_size(s, line);
  } else if (key == "d") {
    c.d = parse_size(s, line);
  } else if (key == "target") {
    c.target = parse_target_kind(v);
  } else if (key == "model") {
    c.model = parse_generator_model(v);
  } else if (key == "knowledge") {
    c.knowledge = parse_knowledge_mode(v);
  } else if (key == "n_e_offset") {
    c.n_e_offset = parse_double(s, line);
  } else if (key == "rho") {
    c.rho = parse_double(s, line);
  } else if (key == "seeds") {
    c.seeds = parse_seeds(v, line);
  } else if (key == "timing") {
    c.timing = parse_bool(v, line);
  } else {
    throw ParseError("unknown key '" + std::string(key) + "'", line);
  }
}

inline void apply_defense_key(ExperimentConfig& c, std::string_view key,
                              std::string_view v, std::size_t line) {
  const std::string s(v);
  if (key == "enabled") {
    c.defense = parse_bool(v, line);
  } else if (key == "r") {
    c.defense_config.r = parse_double(s, line);
  } else if (key == "s") {
    c.defense_config.s = parse_size(s, line);
  } else if (key == "trees") {
    c.defense_config.trees = parse_size(s, line);
  } else if (key == "subsample_size") {
    c.defense_config.subsample_size = parse_size(s, line);
  } else if (key == "ks_alpha") {
    c.defense_config.ks_alpha = parse_double(s, line);
  } else {
    throw ParseError("unknown defense key '" + std::string(key) + "'", line);
  }
}

inline void apply_grid_key(GridSpec& g, std::string_view key,
                           std::string_view v, std::size_t line) {
  const auto items = split_list(v);
  auto doubles = [&] {
    std::vector<double> o;
    for (const auto& x : items) o.push_back(parse_double(x, line));
    return o;
  };
  auto sizes = [&] {
    std::vector<std::size_t> o;
    for (const auto& x : items) o.push_back(parse_size(x, line));
    return o;
  };
  if (key == "epsilon") {
    g.epsilon = doubles();
  } else if (key == "w") {
    g.w = sizes();
  } else if (key == "beta") {
    g.beta = doubles();
  } else if (key == "n_e_offset") {
    g.n_e_offset = doubles();
  } else if (key == "rho") {
    g.rho = doubles();
  } else if (key == "d") {
    g.d = sizes();
  } else if (key == "protocol") {
    g.protocol.clear();
    for (const auto& x : items) g.protocol.push_back(parse_protocol_kind(x));
  } else if (key == "attack") {
    g.attack.clear();
    for (const auto& x : items) g.attack.push_back(parse_attack_or_none(x));
  } else {
    throw ParseError("unknown grid key '" + std::string(key) + "'", line);
  }
}

inline ConfigFile read_config(std::istream& in) {
  ConfigFile cf;
  std::string section = "experiment";
  std::string raw;
  std::size_t no = 0;
  while (std::getline(in, raw)) {
    ++no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section", no);
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", no);
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    try {
      if (section == "experiment") {
        apply_experiment_key(cf.base, key, value, no);
      } else if (section == "defense") {
        apply_defense_key(cf.base, key, value, no);
      } else if (section == "grid") {
        apply_grid_key(cf.grid, key, value, no);
      } else {
        throw ParseError("unknown section '" + section + "'", no);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), no);
    }
  }
  return cf;
}

inline ConfigFile read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfigError("cannot open config '" + path + "'");
  return read_config(in);
}

}  // namespace ldpstream
