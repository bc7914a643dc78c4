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

#ifndef SPOOFKIT_METRICS_HPP_
#define SPOOFKIT_METRICS_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

namespace spoofkit {

// Positive class is label 1 throughout (real for the main task, artifact for
// the artifact-detection task).
struct ScoreItem {
  double score = 0.0;
  int label = 0;
};

using ScoreSet = std::vector<ScoreItem>;

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Predict positive when score >= threshold.
Confusion confusion_at(const ScoreSet& s, double threshold);

struct PrF1 {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// 0/0 ratios resolve to 0 by convention.
PrF1 f1_precision_recall(const ScoreSet& s, double threshold = 0.5);

// Mann-Whitney: fraction of (positive, negative) pairs ranked correctly,
// ties credited 0.5. Equals the trapezoidal ROC area. Throws
// ValidationError unless both labels are present.
double auc(const ScoreSet& s);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Sweeps thresholds at midpoints between adjacent distinct scores, locates
// the sign change of FPR - FNR, and linearly interpolates both rates to the
// crossing. Throws ValidationError unless both labels are present.
EerResult eer(const ScoreSet& s);

struct Report {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double eer = 0.0;
  double auc = 0.0;
  double eer_threshold = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

// All five metrics; F1/precision/recall at threshold 0.5.
Report compute_report(const ScoreSet& s);

// JSON object with exactly the keys
// {f1, precision, recall, eer, auc, eer_threshold, n_pos, n_neg}.
void write_report_json(const Report& r, const std::filesystem::path& path);

// Fixed-width table for terminals/logs, stating the positive class.
std::string report_table(const Report& r, const std::string& positive_class);

// Score CSV: header `file_id,score,label`.
using ScoreRow = std::tuple<std::string, double, int>;
void write_scores_csv(const std::vector<ScoreRow>& rows, const std::filesystem::path& path);
std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path);

}  // namespace spoofkit

#endif  // SPOOFKIT_METRICS_HPP_
