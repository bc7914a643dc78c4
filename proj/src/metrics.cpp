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

#include "spoofkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spoofkit/errors.hpp"

namespace spoofkit {

namespace {

void require_both_labels(const ScoreSet& s, const char* op) {
  bool has_pos = false, has_neg = false;
  for (const auto& it : s) {
    (it.label == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw ValidationError(std::string(op) + ": undefined metric, need both labels present");
  }
}

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

Confusion confusion_at(const ScoreSet& s, double threshold) {
  Confusion c;
  for (const auto& it : s) {
    const bool pred_pos = it.score >= threshold;
    if (it.label == 1) {
      (pred_pos ? c.tp : c.fn) += 1;
    } else {
      (pred_pos ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

PrF1 f1_precision_recall(const ScoreSet& s, double threshold) {
  const Confusion c = confusion_at(s, threshold);
  PrF1 out;
  out.precision = ratio_or_zero(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
  out.recall = ratio_or_zero(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
  out.f1 = ratio_or_zero(2.0 * out.precision * out.recall, out.precision + out.recall);
  return out;
}

double auc(const ScoreSet& s) {
  require_both_labels(s, "auc");

  ScoreSet sorted = s;
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoreItem& a, const ScoreItem& b) { return a.score < b.score; });

  std::size_t total_pos = 0, total_neg = 0;
  for (const auto& it : sorted) (it.label == 1 ? total_pos : total_neg) += 1;

  // Walk groups of tied scores; negatives strictly below count as wins.
  std::uint64_t wins = 0, ties = 0;
  std::size_t neg_below = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    std::size_t group_pos = 0, group_neg = 0;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      (sorted[j].label == 1 ? group_pos : group_neg) += 1;
      ++j;
    }
    wins += static_cast<std::uint64_t>(group_pos) * neg_below;
    ties += static_cast<std::uint64_t>(group_pos) * group_neg;
    neg_below += group_neg;
    i = j;
  }

  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         (static_cast<double>(total_pos) * static_cast<double>(total_neg));
}

EerResult eer(const ScoreSet& s) {
  require_both_labels(s, "eer");

  std::vector<double> distinct;
  distinct.reserve(s.size());
  for (const auto& it : s) distinct.push_back(it.score);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  // Candidate thresholds: below all scores, midpoints, above all scores.
  std::vector<double> thresholds;
  thresholds.reserve(distinct.size() + 1);
  thresholds.push_back(distinct.front() - 1.0);
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    thresholds.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  }
  thresholds.push_back(distinct.back() + 1.0);

  std::size_t total_pos = 0, total_neg = 0;
  for (const auto& it : s) (it.label == 1 ? total_pos : total_neg) += 1;

  auto rates_at = [&](double t) {
    std::size_t fp = 0, fn = 0;
    for (const auto& it : s) {
      if (it.label == 1) {
        if (it.score < t) ++fn;
      } else {
        if (it.score >= t) ++fp;
      }
    }
    return std::pair<double, double>{static_cast<double>(fp) / static_cast<double>(total_neg),
                                     static_cast<double>(fn) / static_cast<double>(total_pos)};
  };

  // FPR - FNR decreases from +1 to -1 as the threshold sweeps upward; find
  // the adjacent pair bracketing the sign change.
  auto [fpr_prev, fnr_prev] = rates_at(thresholds[0]);
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    const auto [fpr, fnr] = rates_at(thresholds[i]);
    const double d_prev = fpr_prev - fnr_prev;
    const double d = fpr - fnr;
    if (d_prev >= 0.0 && d <= 0.0) {
      EerResult r;
      if (d_prev == d) {  // both zero
        r.eer = fpr_prev;
        r.threshold = thresholds[i - 1];
      } else {
        const double lambda = d_prev / (d_prev - d);
        r.eer = fpr_prev + lambda * (fpr - fpr_prev);
        r.threshold = thresholds[i - 1] + lambda * (thresholds[i] - thresholds[i - 1]);
      }
      return r;
    }
    fpr_prev = fpr;
    fnr_prev = fnr;
  }

  // Unreachable given the sweep endpoints.
  throw ValidationError("eer: no crossing found");
}

Report compute_report(const ScoreSet& s) {
  Report r;
  const PrF1 p = f1_precision_recall(s, 0.5);
  r.f1 = p.f1;
  r.precision = p.precision;
  r.recall = p.recall;
  r.auc = auc(s);
  const EerResult e = eer(s);
  r.eer = e.eer;
  r.eer_threshold = e.threshold;
  for (const auto& it : s) (it.label == 1 ? r.n_pos : r.n_neg) += 1;
  return r;
}

void write_report_json(const Report& r, const std::filesystem::path& path) {
  nlohmann::json j;
  j["f1"] = r.f1;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["eer"] = r.eer;
  j["auc"] = r.auc;
  j["eer_threshold"] = r.eer_threshold;
  j["n_pos"] = r.n_pos;
  j["n_neg"] = r.n_neg;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("write_report_json: cannot open for writing: " + path.string());
  f << j.dump(2) << '\n';
  if (!f) throw IoError("write_report_json: write failed: " + path.string());
}

std::string report_table(const Report& r, const std::string& positive_class) {
  std::ostringstream os;
  os << "positive class: " << positive_class << " (label 1), n_pos=" << r.n_pos
     << " n_neg=" << r.n_neg << "\n";
  os << "  F1         " << r.f1 << "\n";
  os << "  Precision  " << r.precision << "\n";
  os << "  Recall     " << r.recall << "\n";
  os << "  EER        " << r.eer << "  (threshold " << r.eer_threshold << ")\n";
  os << "  AUC        " << r.auc << "\n";
  return os.str();
}

void write_scores_csv(const std::vector<ScoreRow>& rows, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("write_scores_csv: cannot open for writing: " + path.string());
  f << "file_id,score,label\n";
  f.precision(17);
  for (const auto& [id, score, label] : rows) {
    f << id << ',' << score << ',' << label << '\n';
  }
  if (!f) throw IoError("write_scores_csv: write failed: " + path.string());
}

std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingInputError("read_scores_csv: no such file: " + path.string());
  }
  std::ifstream f(path);
  if (!f) throw IoError("read_scores_csv: cannot open " + path.string());

  std::vector<ScoreRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || lineno == 1) continue;  // header
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ParseError("read_scores_csv: " + path.string() + ":" + std::to_string(lineno) +
                       ": expected 3 columns");
    }
    try {
      rows.emplace_back(line.substr(0, c1), std::stod(line.substr(c1 + 1, c2 - c1 - 1)),
                        std::stoi(line.substr(c2 + 1)));
    } catch (const std::exception&) {
      throw ParseError("read_scores_csv: " + path.string() + ":" + std::to_string(lineno) +
                       ": malformed row");
    }
  }
  return rows;
}

}  // namespace spoofkit
