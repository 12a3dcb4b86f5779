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

#include "lectometer/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace lectometer::metrics {

const ClassScores& EvalReport::at(const std::string& label) const {
  for (const auto& c : per_class) {
    if (c.label == label) return c;
  }
  throw ValidationError("no report row for '" + label + "'");
}

Scores prf(int tp, int fp, int fn) {
  Scores s;
  s.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  const double sum = s.precision + s.recall;
  s.f1 = sum > 0.0 ? 2.0 * s.precision * s.recall / sum : 0.0;
  return s;
}

EvalReport per_class_prf(const std::vector<std::string>& gold,
                         const std::vector<std::string>& pred,
                         const std::vector<std::string>& order) {
  if (gold.size() != pred.size()) {
    throw ValidationError("metrics: gold and predicted lengths differ");
  }
  if (gold.empty()) throw ValidationError("metrics: empty evaluation set");

  std::map<std::string, int> tp, fp, fn;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == pred[i]) {
      ++tp[gold[i]];
    } else {
      ++fn[gold[i]];
      ++fp[pred[i]];
    }
  }
  std::map<std::string, int> support;
  for (const auto& g : gold) ++support[g];

  std::vector<std::string> rows;
  std::set<std::string> placed;
  for (const auto& label : order) {
    if (support.count(label) && placed.insert(label).second) rows.push_back(label);
  }
  for (const auto& [label, n] : support) {
    if (placed.insert(label).second) rows.push_back(label);
  }

  EvalReport report;
  report.n_test = static_cast<int>(gold.size());
  std::vector<Scores> scores;
  for (const auto& label : rows) {
    ClassScores c{label, prf(tp[label], fp[label], fn[label]), support[label]};
    scores.push_back(c.scores);
    report.per_class.push_back(std::move(c));
  }
  report.macro = macro_average(scores);
  return report;
}

Scores macro_average(const std::vector<Scores>& per_class) {
  if (per_class.empty()) throw ValidationError("macro average of no classes");
  Scores m;
  for (const auto& s : per_class) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  const double n = static_cast<double>(per_class.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

std::vector<double> label_distribution(const std::vector<std::string>& pred,
                                       const std::vector<std::string>& columns) {
  if (pred.empty()) throw ValidationError("label distribution of no predictions");
  std::vector<int> counts(columns.size(), 0);
  for (const auto& p : pred) {
    auto it = std::find(columns.begin(), columns.end(), p);
    if (it == columns.end()) {
      throw ValidationError("predicted label '" + p + "' is not a column");
    }
    ++counts[static_cast<std::size_t>(it - columns.begin())];
  }
  std::vector<double> out(columns.size());
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out[i] = 100.0 * counts[i] / static_cast<double>(pred.size());
  }
  return out;
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string to_tsv(const EvalReport& report,
                   const std::map<std::string, int>& train_support) {
  const bool with_train = !train_support.empty();
  std::ostringstream out;
  out << "label\tprecision\trecall\tF1\tsupport";
  if (with_train) out << "\ttrain";
  out << '\n';
  for (const auto& c : report.per_class) {
    out << c.label << '\t' << fixed(c.scores.precision, 2) << '\t'
        << fixed(c.scores.recall, 2) << '\t' << fixed(c.scores.f1, 2) << '\t'
        << c.support;
    if (with_train) {
      auto it = train_support.find(c.label);
      out << '\t' << (it == train_support.end() ? 0 : it->second);
    }
    out << '\n';
  }
  out << "macro average\t" << fixed(report.macro.precision, 2) << '\t'
      << fixed(report.macro.recall, 2) << '\t' << fixed(report.macro.f1, 2)
      << '\t' << report.n_test;
  if (with_train) {
    int total = 0;
    for (const auto& [label, n] : train_support) total += n;
    out << '\t' << total;
  }
  out << '\n';
  return out.str();
}

std::string to_tsv(const LabelDistribution& distribution) {
  std::ostringstream out;
  out << "held-out";
  for (const auto& c : distribution.columns) out << '\t' << c;
  out << '\n';
  for (const auto& row : distribution.rows) {
    out << row.label;
    for (std::size_t i = 0; i < distribution.columns.size(); ++i) {
      out << '\t';
      if (distribution.columns[i] == row.label) {
        out << "---";
      } else {
        out << fixed(row.percent[i], 1);
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace lectometer::metrics
