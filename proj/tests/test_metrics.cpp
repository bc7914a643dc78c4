// Copyright 2026 The SpoofKit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <fstream>

#include <doctest.h>
#include <json.hpp>

#include "spoofkit/errors.hpp"
#include "spoofkit/metrics.hpp"
#include "spoofkit/rng.hpp"
#include "testing_util.hpp"

using namespace spoofkit;
using spoofkit::testing::TempDir;

namespace {

// Pair-counting oracle, quadratic on purpose.
double auc_oracle(const ScoreSet& s) {
  double wins = 0.0, ties = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (const auto& p : s) {
    if (p.label != 1) continue;
    ++n_pos;
    for (const auto& n : s) {
      if (n.label == 1) continue;
      if (p.score > n.score) wins += 1.0;
      else if (p.score == n.score) ties += 1.0;
    }
  }
  for (const auto& n : s) n_neg += n.label != 1;
  return (wins + 0.5 * ties) / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Brute-force threshold enumeration with from-scratch rate counting.
EerResult eer_oracle(const ScoreSet& s) {
  std::vector<double> scores;
  for (const auto& it : s) scores.push_back(it.score);
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());

  std::vector<double> thresholds{scores.front() - 1.0};
  for (std::size_t i = 0; i + 1 < scores.size(); ++i) {
    thresholds.push_back(0.5 * (scores[i] + scores[i + 1]));
  }
  thresholds.push_back(scores.back() + 1.0);

  auto rates = [&](double t) {
    double fp = 0, fn = 0, pos = 0, neg = 0;
    for (const auto& it : s) {
      if (it.label == 1) {
        ++pos;
        if (it.score < t) ++fn;
      } else {
        ++neg;
        if (it.score >= t) ++fp;
      }
    }
    return std::pair<double, double>{fp / neg, fn / pos};
  };

  for (std::size_t i = 0; i + 1 < thresholds.size(); ++i) {
    const auto [fpr_a, fnr_a] = rates(thresholds[i]);
    const auto [fpr_b, fnr_b] = rates(thresholds[i + 1]);
    const double da = fpr_a - fnr_a;
    const double db = fpr_b - fnr_b;
    if (da >= 0.0 && db <= 0.0) {
      if (da == db) return {fpr_a, thresholds[i]};
      const double lambda = da / (da - db);
      return {fpr_a + lambda * (fpr_b - fpr_a),
              thresholds[i] + lambda * (thresholds[i + 1] - thresholds[i])};
    }
  }
  return {1.0, thresholds.back()};
}

ScoreSet random_set(Rng& rng, std::size_t n, bool allow_ties) {
  ScoreSet s;
  while (true) {
    s.clear();
    for (std::size_t i = 0; i < n; ++i) {
      double score = allow_ties ? std::floor(rng.uniform(0.0, 11.0)) / 10.0 : rng.next_double();
      s.push_back(ScoreItem{score, static_cast<int>(rng.uniform_int(2))});
    }
    bool pos = false, neg = false;
    for (const auto& it : s) (it.label == 1 ? pos : neg) = true;
    if (pos && neg) return s;
  }
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion counts at a threshold") {
  const ScoreSet s{{0.9, 1}, {0.1, 0}};
  const Confusion c = confusion_at(s, 0.5);
  CHECK(c.tp == 1);
  CHECK(c.fp == 0);
  CHECK(c.tn == 1);
  CHECK(c.fn == 0);

  const Confusion all_pos = confusion_at(s, 0.0);
  CHECK(all_pos.fn == 0);
  CHECK(all_pos.tn == 0);

  const Confusion all_neg = confusion_at(s, 1.5);
  CHECK(all_neg.tp == 0);
  CHECK(all_neg.fp == 0);
}

TEST_CASE("f1 follows the 0/0 -> 0 convention") {
  // TP=1, FP=1, FN=1
  const ScoreSet s{{0.9, 1}, {0.8, 0}, {0.1, 1}};
  const PrF1 r = f1_precision_recall(s, 0.5);
  CHECK(r.precision == 0.5);
  CHECK(r.recall == 0.5);
  CHECK(r.f1 == 0.5);

  const ScoreSet separable{{0.9, 1}, {0.8, 1}, {0.2, 0}};
  CHECK(f1_precision_recall(separable, 0.5).f1 == 1.0);

  const ScoreSet none_predicted{{0.1, 1}, {0.2, 0}};
  const PrF1 z = f1_precision_recall(none_predicted, 0.5);
  CHECK(z.precision == 0.0);
  CHECK(z.f1 == 0.0);
}

TEST_CASE("auc on the documented examples") {
  const ScoreSet s{{0.9, 1}, {0.4, 1}, {0.5, 0}, {0.1, 0}};
  CHECK(auc(s) == 0.75);  // 3 of 4 pairs ranked correctly

  const ScoreSet separable{{0.9, 1}, {0.8, 1}, {0.2, 0}, {0.1, 0}};
  CHECK(auc(separable) == 1.0);

  const ScoreSet all_tied{{0.5, 1}, {0.5, 0}, {0.5, 1}, {0.5, 0}};
  CHECK(auc(all_tied) == 0.5);

  const ScoreSet one_class{{0.5, 1}, {0.6, 1}};
  CHECK_THROWS_AS(auc(one_class), ValidationError);
}

TEST_CASE("eer on the documented examples") {
  const ScoreSet separable{{0.9, 1}, {0.8, 1}, {0.1, 0}, {0.2, 0}};
  const EerResult a = eer(separable);
  CHECK(a.eer == 0.0);

  const ScoreSet crossing{{0.8, 1}, {0.2, 1}, {0.7, 0}, {0.3, 0}};
  const EerResult b = eer(crossing);
  CHECK(b.eer == 0.5);

  // Swapped labels on a separable set: the rates only meet at 1.
  const ScoreSet swapped{{0.9, 0}, {0.8, 0}, {0.1, 1}, {0.2, 1}};
  const EerResult c = eer(swapped);
  CHECK(c.eer == eer_oracle(swapped).eer);
  CHECK(c.eer == 1.0);

  const ScoreSet one_class{{0.5, 0}, {0.6, 0}};
  CHECK_THROWS_AS(eer(one_class), ValidationError);
}

TEST_CASE("auc matches the pair-counting oracle exactly on small sets") {
  Rng rng(51);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 2 + rng.uniform_int(11);
    const ScoreSet s = random_set(rng, n, trial % 2 == 0);
    REQUIRE(auc(s) == auc_oracle(s));
  }
}

TEST_CASE("eer matches brute-force threshold enumeration on small sets") {
  Rng rng(52);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 2 + rng.uniform_int(11);
    const ScoreSet s = random_set(rng, n, trial % 2 == 0);
    const EerResult mine = eer(s);
    const EerResult oracle = eer_oracle(s);
    REQUIRE(std::abs(mine.eer - oracle.eer) < 1e-9);
    REQUIRE(std::abs(mine.threshold - oracle.threshold) < 1e-9);
  }
}

TEST_CASE("auc is invariant under strictly monotone score transforms") {
  Rng rng(53);
  for (int trial = 0; trial < 200; ++trial) {
    const ScoreSet s = random_set(rng, 2 + rng.uniform_int(11), trial % 2 == 0);
    ScoreSet t = s;
    for (auto& it : t) it.score = std::exp(3.0 * it.score) - 0.5;
    REQUIRE(auc(t) == auc(s));
  }
}

TEST_CASE("flipping labels complements auc on tie-free sets") {
  Rng rng(54);
  for (int trial = 0; trial < 200; ++trial) {
    const ScoreSet s = random_set(rng, 2 + rng.uniform_int(11), false);
    ScoreSet flipped = s;
    for (auto& it : flipped) it.label = 1 - it.label;
    REQUIRE(auc(s) + auc(flipped) == 1.0);
  }
}

TEST_CASE("eer is zero exactly for separated sets") {
  Rng rng(55);
  for (int trial = 0; trial < 300; ++trial) {
    const ScoreSet s = random_set(rng, 2 + rng.uniform_int(11), false);
    double min_pos = 2.0, max_neg = -2.0;
    for (const auto& it : s) {
      if (it.label == 1) min_pos = std::min(min_pos, it.score);
      else max_neg = std::max(max_neg, it.score);
    }
    const EerResult r = eer(s);
    REQUIRE(r.eer >= 0.0);
    REQUIRE(r.eer <= 1.0);
    if (min_pos > max_neg) {
      REQUIRE(r.eer == 0.0);
    } else {
      REQUIRE(r.eer > 0.0);
    }
  }
}

TEST_CASE("report JSON carries exactly the documented keys") {
  TempDir dir("rep");
  const ScoreSet s{{0.9, 1}, {0.6, 1}, {0.4, 0}, {0.2, 0}, {0.7, 0}};
  const Report r = compute_report(s);
  write_report_json(r, dir / "report.json");

  std::ifstream f(dir / "report.json");
  nlohmann::json j;
  f >> j;
  REQUIRE(j.is_object());
  CHECK(j.size() == 8);
  for (const char* key :
       {"f1", "precision", "recall", "eer", "auc", "eer_threshold", "n_pos", "n_neg"}) {
    REQUIRE(j.contains(key));
  }

  // Values agree bit-exact with the individual operations.
  CHECK(j["auc"].get<double>() == auc(s));
  CHECK(j["eer"].get<double>() == eer(s).eer);
  CHECK(j["f1"].get<double>() == f1_precision_recall(s, 0.5).f1);
  CHECK(j["n_pos"].get<std::size_t>() == 2);
  CHECK(j["n_neg"].get<std::size_t>() == 3);

  const std::string table = report_table(r, "real");
  CHECK(table.find("positive class: real") != std::string::npos);
}

TEST_CASE("score csv round trips") {
  TempDir dir("csv");
  const std::vector<ScoreRow> rows{{"a", 0.125, 1}, {"b", 0.875, 0}};
  write_scores_csv(rows, dir / "s.csv");
  const auto back = read_scores_csv(dir / "s.csv");
  REQUIRE(back.size() == 2);
  CHECK(std::get<0>(back[0]) == "a");
  CHECK(std::get<1>(back[0]) == 0.125);
  CHECK(std::get<2>(back[1]) == 0);
}

}  // TEST_SUITE
