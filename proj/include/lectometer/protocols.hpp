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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "lectometer/common.hpp"
#include "lectometer/metrics.hpp"
#include "lectometer/model.hpp"
#include "lectometer/snippets.hpp"

namespace lectometer::protocols {

enum class Regime { kUtterance, kFile, kHeldoutDialects };
enum class Setting {
  kDialectId,
  kLanguageId,
  kLanguageIdHeldout,
  kSimilarity,
  kControlFile,
  kControlGroups,
};
enum class LabelLevel { kDialect, kLanguage, kFile };

std::string_view to_string(Regime regime);
std::string_view to_string(Setting setting);
Regime parse_regime(std::string_view name);
Setting parse_setting(std::string_view name);

struct SplitPlan {
  std::vector<Eigen::Index> train;  // ascending snippet indices
  std::vector<Eigen::Index> test;   // ascending snippet indices
  Regime regime = Regime::kUtterance;
  std::uint64_t seed = 0;
};

// Per-group test size: round(fraction * n) clamped to [1, n - 1].
int clamped_test_count(int n, double test_fraction);

/// Per-dialect stratified random split of snippets. Throws ValidationError if
/// a dialect has fewer than two snippets.
SplitPlan utterance_split(const snippets::SnippetDataset& dataset,
                          double test_fraction, std::uint64_t seed);

/// Per-dialect random split of whole files; snippets follow their file.
/// Throws ValidationError if a dialect has fewer than two files.
SplitPlan file_split(const snippets::SnippetDataset& dataset,
                     double test_fraction, std::uint64_t seed);

// Structural check of the regime invariant: disjoint sides, no shared file
// under kFile, no held-out dialect in train under kHeldoutDialects.
void check_split(const snippets::SnippetDataset& dataset, const SplitPlan& plan,
                 const std::vector<std::string>& heldout_dialects = {});

struct ProtocolConfig {
  Setting setting = Setting::kDialectId;
  Regime regime = Regime::kUtterance;
  Pooling pooling = Pooling::kMax;
  double C = 1.0;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  std::vector<int> group_sizes;  // kControlGroups only
  bool standardize = false;      // z-score features on the training side
  double tol = 1e-6;
  int max_iter = 1000;
  double window_seconds = 5.0;
  double keep_partial_if_at_least = 0.5;
};

ProtocolConfig parse_run_spec(const std::string& json_text);
std::string run_spec_to_json(const ProtocolConfig& config);

struct FitSummary {
  std::string label;  // which fit (e.g. held-out dialect); empty if single
  bool converged = false;
  int iterations = 0;
  double final_objective = 0.0;
  double grad_inf_norm = 0.0;
};

struct ProtocolResult {
  ProtocolConfig config;
  std::variant<metrics::EvalReport, metrics::LabelDistribution> report;
  std::map<std::string, int> train_support;  // training snippets per class
  std::vector<std::string> heldout;          // held-out dialects, if any
  std::vector<std::vector<std::string>> groups;  // arbitrary-group partition
  std::vector<FitSummary> fits;
  std::optional<model::ProbeModel> model;  // single-fit settings only

  const metrics::EvalReport& eval() const;
  const metrics::LabelDistribution& distribution() const;
};

ProtocolResult run_identification(const snippets::SnippetDataset& dataset,
                                  LabelLevel level, const ProtocolConfig& config);
ProtocolResult run_language_id_heldout(const snippets::SnippetDataset& dataset,
                                       const ProtocolConfig& config);
ProtocolResult run_similarity(const snippets::SnippetDataset& dataset,
                              const ProtocolConfig& config);
ProtocolResult run_file_control(const snippets::SnippetDataset& dataset,
                                const ProtocolConfig& config);
ProtocolResult run_group_control(const snippets::SnippetDataset& dataset,
                                 const ProtocolConfig& config);

// Dispatches on config.setting.
ProtocolResult run_protocol(const snippets::SnippetDataset& dataset,
                            const ProtocolConfig& config);

// Table-shaped report.
std::string result_to_tsv(const ProtocolResult& result);
// Full-precision report with config, fit diagnostics and partitions.
std::string result_to_json(const ProtocolResult& result);

}  // namespace lectometer::protocols
