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


// Experiment runner: sweeps a config grid and writes the metrics CSV, or a
// mismatch matrix, plus optional per-run traces.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ldpstream/ldpstream.hpp"

namespace {

using namespace ldpstream;

void write_traces(const std::filesystem::path& dir,
                  const std::vector<ExperimentConfig>& configs) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    for (auto seed : configs[i].seeds) {
      FrequencyRunResult run;
      run_single(configs[i], i, seed, &run);
      const std::string stem =
          "run" + std::to_string(i) + "_seed" + std::to_string(seed);
      std::ofstream p(dir / (stem + "_protocol.csv"));
      write_protocol_trace_csv(p, run.trace);
      if (configs[i].attack) {
        std::ofstream a(dir / (stem + "_attack.csv"));
        write_attack_trace_csv(a, run.attack_trace);
      }
      if (configs[i].defense) {
        std::ofstream d(dir / (stem + "_defense.csv"));
        write_defense_trace_csv(d, run.defense_trace);
      }
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ldpstream experiment runner"};
  std::string config_path;
  std::string out_path = "-";
  std::string seeds;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  std::string protocol, attack, target, tuned_for, knowledge;
  std::optional<double> epsilon, beta, rho;
  std::optional<std::size_t> w, n, T, d;
  bool defense = false;
  bool no_timing = false;
  std::string trace_dir;
  std::vector<std::string> mismatch;

  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--out", out_path, "output CSV ('-' for stdout)");
  app.add_option("--seeds", seeds, "seed list, e.g. 1-20 or 3,5,7");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--protocol", protocol, "LBD|LBA|LPD|LPA|LBU|LPU|LSP");
  app.add_option("--attack", attack, "IUA|OUA|ISA|OSA|IAA|OAA|none");
  app.add_option("--tuned-for", tuned_for, "protocol the attack assumes");
  app.add_option("--epsilon", epsilon, "privacy budget per window");
  app.add_option("--w", w, "window size");
  app.add_option("--beta", beta, "fake-user fraction m/(m+n)");
  app.add_option("--target", target, "Uniform|Pulse|Gaussian|Sigmoid");
  app.add_option("--knowledge", knowledge, "full|partial|mitm");
  app.add_option("--rho", rho, "observed fraction for partial/mitm");
  app.add_option("--n", n, "genuine users");
  app.add_option("--T", T, "timestamps");
  app.add_option("--d", d, "domain size");
  app.add_flag("--defense", defense, "enable the subsampling defense");
  app.add_flag("--no-timing", no_timing, "write wall_ms as 0");
  app.add_option("--trace-dir", trace_dir, "write per-run trace CSVs here");
  app.add_option("--mismatch", mismatch,
                 "protocols for a mismatch matrix (rows and columns)")
      ->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  try {
    ConfigFile cf;
    if (!config_path.empty()) cf = read_config(config_path);
    ExperimentConfig& base = cf.base;
    if (!protocol.empty()) apply_experiment_key(base, "protocol", protocol);
    if (!attack.empty()) apply_experiment_key(base, "attack", attack);
    if (!tuned_for.empty()) apply_experiment_key(base, "tuned_for", tuned_for);
    if (!target.empty()) apply_experiment_key(base, "target", target);
    if (!knowledge.empty()) apply_experiment_key(base, "knowledge", knowledge);
    if (!seeds.empty()) apply_experiment_key(base, "seeds", seeds);
    if (epsilon) base.epsilon = *epsilon;
    if (beta) base.beta = *beta;
    if (rho) base.rho = *rho;
    if (w) base.w = *w;
    if (n) base.n = *n;
    if (T) base.T = *T;
    if (d) base.d = *d;
    if (defense) base.defense = true;
    if (no_timing) base.timing = false;

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (out_path != "-") {
      file.open(out_path);
      if (!file) throw InvalidConfigError("cannot write '" + out_path + "'");
      out = &file;
    }

    if (!mismatch.empty()) {
      std::vector<ProtocolKind> kinds;
      for (const auto& m : mismatch) kinds.push_back(parse_protocol_kind(m));
      write_mismatch_csv(*out, mismatch_matrix(kinds, kinds, base, threads));
      return 0;
    }

    const auto configs = expand_grid(base, cf.grid);
    const auto rows = run_grid(configs, threads);
    std::size_t short_runs = 0;
    for (const auto& r : rows) {
      if (r.seed == "all" && r.m_insufficient) ++short_runs;
    }
    if (short_runs > 0) {
      std::cerr << "warning: " << short_runs << " of " << configs.size()
                << " configs have fewer fake users than the sufficient "
                   "condition asks for\n";
    }
    write_metrics_csv(*out, rows);
    if (!trace_dir.empty()) write_traces(trace_dir, configs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
