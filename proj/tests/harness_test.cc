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


#include "ldpstream/harness.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

namespace ldpstream {
namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.n = 5000;
  c.T = 30;
  c.w = 5;
  c.seeds = {1, 2};
  c.timing = false;
  return c;
}

std::string to_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  write_metrics_csv(os, rows);
  return os.str();
}

TEST(HarnessTest, DeterministicWithoutTiming) {
  auto c = small_config();
  c.defense = true;
  const auto a = to_csv(run_experiment(c));
  const auto b = to_csv(run_experiment(c, 2));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), kMetricsCsvVersion);
}

TEST(HarnessTest, RowsPerSeedThenAggregate) {
  auto c = small_config();
  const auto rows = run_experiment(c);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].seed, "1");
  EXPECT_EQ(rows[1].seed, "2");
  EXPECT_EQ(rows[2].seed, "all");
  EXPECT_NEAR(rows[2].mse_attack,
              (rows[0].mse_attack + rows[1].mse_attack) / 2, 1e-15);
  EXPECT_DOUBLE_EQ(rows[0].beta, 0.2);
  EXPECT_EQ(rows[0].attack, "OAA");
  EXPECT_TRUE(std::isnan(rows[0].ag));
  EXPECT_DOUBLE_EQ(rows[0].wall_ms, 0.0);
}

TEST(HarnessTest, CsvRoundTrip) {
  auto c = small_config();
  c.attack = AttackKind::kIua;
  c.protocol = ProtocolKind::kLba;
  const auto rows = run_experiment(c);
  std::istringstream in(to_csv(rows));
  const auto back = read_metrics_csv(in);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].seed, rows[i].seed);
    EXPECT_EQ(back[i].protocol, "LBA");
    EXPECT_EQ(back[i].attack, "IUA");
    EXPECT_EQ(back[i].mse_attack, rows[i].mse_attack);
    EXPECT_EQ(back[i].bound_lo, rows[i].bound_lo);
    EXPECT_EQ(back[i].n, rows[i].n);
    EXPECT_TRUE(std::isnan(back[i].ag));
  }
  EXPECT_EQ(to_csv(back), to_csv(rows));
}

TEST(HarnessTest, CsvRejectsUnknownVersion) {
  std::istringstream a("# other v9\nheader\n");
  EXPECT_THROW(read_metrics_csv(a), ParseError);
  std::istringstream b(std::string(kMetricsCsvVersion) + "\nh\n1,2,3\n");
  EXPECT_THROW(read_metrics_csv(b), ParseError);
}

TEST(HarnessTest, NoAttackOnTruthTargetsScoresUtility) {
  GeneratorConfig g;
  g.seed = 3;
  const auto s = gen_synthetic(g, 5000, 30);
  FrequencyRunConfig rc;
  rc.protocol.kind = ProtocolKind::kLpd;
  rc.protocol.w = 5;
  const auto r = run_frequency(s, truth_stream(s), rc);
  EXPECT_EQ(r.mse_attack, r.mse_utility);
}

TEST(HarnessTest, ZeroBetaMatchesNoAttack) {
  auto c = small_config();
  c.beta = 0.0;
  auto none = c;
  none.attack.reset();
  const auto a = run_experiment(c);
  const auto b = run_experiment(none);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mse_attack, b[i].mse_attack);
    EXPECT_EQ(a[i].mse_utility, b[i].mse_utility);
  }
}

TEST(HarnessTest, DefenseFillsAccuracyGain) {
  auto c = small_config();
  c.defense = true;
  const auto rows = run_experiment(c);
  for (const auto& r : rows) EXPECT_FALSE(std::isnan(r.ag));
}

TEST(HarnessTest, Validation) {
  auto c = small_config();
  c.epsilon = 0;
  EXPECT_THROW(run_experiment(c), InvalidConfigError);
  c = small_config();
  c.beta = 1.0;
  EXPECT_THROW(run_experiment(c), InvalidConfigError);
  c = small_config();
  c.seeds.clear();
  EXPECT_THROW(run_experiment(c), InvalidConfigError);
  c = small_config();
  c.d = 1;
  EXPECT_THROW(run_experiment(c), InvalidConfigError);
}

TEST(GridTest, ExpansionOrder) {
  ExperimentConfig base;
  GridSpec g;
  g.protocol = {ProtocolKind::kLbd, ProtocolKind::kLpa};
  g.epsilon = {0.5, 1, 2};
  g.attack = {std::nullopt, AttackKind::kOua};
  const auto cs = expand_grid(base, g);
  ASSERT_EQ(cs.size(), 12u);
  EXPECT_EQ(cs[0].protocol, ProtocolKind::kLbd);
  EXPECT_FALSE(cs[0].attack.has_value());
  EXPECT_DOUBLE_EQ(cs[0].epsilon, 0.5);
  EXPECT_DOUBLE_EQ(cs[1].epsilon, 1);
  EXPECT_EQ(cs[3].attack, AttackKind::kOua);
  EXPECT_EQ(cs[6].protocol, ProtocolKind::kLpa);
  EXPECT_EQ(expand_grid(base, GridSpec{}).size(), 1u);
}

TEST(ConfigTest, ParsesSections) {
  std::istringstream in(
      "# sweep\n"
      "[experiment]\n"
      "protocol = LPA\n"
      "attack = none   # clean run\n"
      "epsilon = 0.5\n"
      "seeds = 1-3, 7\n"
      "target = Pulse\n"
      "knowledge = full\n"
      "timing = false\n"
      "[defense]\n"
      "enabled = yes\n"
      "r = 0.25\n"
      "[grid]\n"
      "w = 10, 20\n"
      "attack = IUA, none\n");
  const auto cf = read_config(in);
  EXPECT_EQ(cf.base.protocol, ProtocolKind::kLpa);
  EXPECT_FALSE(cf.base.attack.has_value());
  EXPECT_DOUBLE_EQ(cf.base.epsilon, 0.5);
  EXPECT_EQ(cf.base.seeds, (std::vector<std::uint64_t>{1, 2, 3, 7}));
  EXPECT_EQ(cf.base.target, TargetKind::kPulse);
  EXPECT_DOUBLE_EQ(effective_beta(cf.base), 0.3);
  EXPECT_EQ(cf.base.knowledge, KnowledgeMode::kFull);
  EXPECT_FALSE(cf.base.timing);
  EXPECT_TRUE(cf.base.defense);
  EXPECT_DOUBLE_EQ(cf.base.defense_config.r, 0.25);
  EXPECT_EQ(cf.grid.w, (std::vector<std::size_t>{10, 20}));
  ASSERT_EQ(cf.grid.attack.size(), 2u);
  EXPECT_EQ(cf.grid.attack[0], AttackKind::kIua);
  EXPECT_FALSE(cf.grid.attack[1].has_value());
}

TEST(ConfigTest, ErrorsCarryLine) {
  const char* bad[] = {"protocol = LBD\nbogus = 1\n", "epsilon = abc\n",
                       "[defense]\nenabled = maybe\n", "[nope]\nx = 1\n",
                       "protocol = LBD\nprotocol LBA\n", "[grid\n",
                       "\n\nattack = XYZ\n"};
  const std::size_t lines[] = {2, 1, 2, 2, 2, 1, 3};
  for (std::size_t i = 0; i < std::size(bad); ++i) {
    std::istringstream in(bad[i]);
    try {
      read_config(in);
      ADD_FAILURE() << "accepted: " << bad[i];
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), lines[i]) << bad[i];
    }
  }
  EXPECT_THROW(read_config(std::string("/nonexistent/x.ini")),
               InvalidConfigError);
}

TEST(HarnessTest, DefaultRunIsFast) {
  ExperimentConfig c;
  c.defense = false;
  const auto start = std::chrono::steady_clock::now();
  const auto row = run_single(c, 0, 1);
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  EXPECT_LT(secs, 10.0);
  EXPECT_FALSE(std::isnan(row.mse_attack));
  EXPECT_FALSE(std::isnan(row.bound_lo));
}

TEST(MismatchTest, DiagonalFlagged) {
  auto c = small_config();
  c.seeds = {1};
  const auto cells = mismatch_matrix({ProtocolKind::kLbd, ProtocolKind::kLpd},
                                     {ProtocolKind::kLbd, ProtocolKind::kLpd},
                                     c);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_TRUE(cells[0].diagonal);
  EXPECT_FALSE(cells[1].diagonal);
  EXPECT_EQ(cells[1].tuned_for, ProtocolKind::kLpd);
  std::ostringstream os;
  write_mismatch_csv(os, cells);
  EXPECT_NE(os.str().find("LPD,LBD,"), std::string::npos);
}

}  // namespace
}  // namespace ldpstream
