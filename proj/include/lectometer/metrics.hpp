// Copyright (c) 2026 The Lectometer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "lectometer/common.hpp"

namespace lectometer::metrics {

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassScores {
  std::string label;
  Scores scores;
  int support = 0;  // gold count in the evaluated set
};

struct EvalReport {
  std::vector<ClassScores> per_class;  // gold-present classes only
  Scores macro;
  int n_test = 0;

  const ClassScores& at(const std::string& label) const;
};

// Zero denominators give 0 rather than NaN.
Scores prf(int true_pos, int false_pos, int false_neg);

/// Per-class precision/recall/F1 with macro averages over the classes present
/// in `gold`. Rows follow `order` (labels absent from gold are skipped, gold
/// labels missing from `order` are appended sorted); with an empty `order`
/// rows are sorted.
EvalReport per_class_prf(const std::vector<std::string>& gold,
                         const std::vector<std::string>& pred,
                         const std::vector<std::string>& order = {});

Scores macro_average(const std::vector<Scores>& per_class);

// Percentage of predictions per column, in column order.
std::vector<double> label_distribution(const std::vector<std::string>& pred,
                                       const std::vector<std::string>& columns);

struct DistributionRow {
  std::string label;  // the held-out label
  std::vector<double> percent;  // aligned with LabelDistribution::columns
  int n_predictions = 0;
};

struct LabelDistribution {
  std::vector<std::string> columns;
  std::vector<DistributionRow> rows;
};

// Display formatting used by the TSV writers: fixed, given decimals.
std::string fixed(double value, int decimals);

// Table layout: label, precision, recall, F1, support, then a "macro average"
// row. Extra integer columns (e.g. per-class training sizes) are appended
// when given.
std::string to_tsv(const EvalReport& report,
                   const std::map<std::string, int>& train_support = {});
// Held-out labels in rows, predicted labels in columns, "---" where a row
// label meets its own column.
std::string to_tsv(const LabelDistribution& distribution);

}  // namespace lectometer::metrics
