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

#include "lectometer/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"

namespace lectometer::protocols {

using nlohmann::json;
using snippets::SnippetDataset;

namespace {

constexpr std::pair<Regime, std::string_view> kRegimeNames[] = {
    {Regime::kUtterance, "utterance"},
    {Regime::kFile, "file"},
    {Regime::kHeldoutDialects, "heldout_dialects"},
};

constexpr std::pair<Setting, std::string_view> kSettingNames[] = {
    {Setting::kDialectId, "dialect_id"},
    {Setting::kLanguageId, "language_id"},
    {Setting::kLanguageIdHeldout, "language_id_heldout"},
    {Setting::kSimilarity, "similarity"},
    {Setting::kControlFile, "control_file"},
    {Setting::kControlGroups, "control_groups"},
};

// Fisher-Yates driven by raw mt19937_64 output, so the permutation does not
// depend on the standard library's distribution implementations.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

std::size_t seeded_choice(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return static_cast<std::size_t>(rng() % n);
}

std::vector<Eigen::Index> indices_of_dialect(const SnippetDataset& ds,
                                             const std::string& dialect) {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.labels[i].dialect == dialect) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

const std::string& label_at(const SnippetDataset& ds, std::size_t i,
                            LabelLevel level) {
  const auto& l = ds.labels[i];
  switch (level) {
    case LabelLevel::kDialect: return l.dialect;
    case LabelLevel::kLanguage: return l.language;
    case LabelLevel::kFile: return l.file_id;
  }
  return l.dialect;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& X,
                            const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  }
  return out;
}

struct TrainedProbe {
  model::ProbeModel model;
  model::FitReport report;
};

// Fits on the given rows. With standardization the scaling is folded back
// into the model, which then operates on raw features.
TrainedProbe train_probe(const SnippetDataset& ds,
                         const std::vector<Eigen::Index>& rows,
                         const std::vector<std::string>& labels,
                         const ProtocolConfig& config, std::uint64_t fit_seed) {
  Eigen::MatrixXd X = gather_rows(ds.vectors, rows);
  model::FitOptions options;
  options.C = config.C;
  options.tol = config.tol;
  options.max_iter = config.max_iter;
  options.seed = fit_seed;

  Eigen::VectorXd mean, scale;
  if (config.standardize) {
    mean = X.colwise().mean().transpose();
    X.rowwise() -= mean.transpose();
    scale = (X.array().square().colwise().sum() / static_cast<double>(X.rows()))
                .sqrt()
                .transpose();
    scale = scale.unaryExpr([](double s) { return s > 0.0 ? s : 1.0; });
    X = X * scale.cwiseInverse().asDiagonal();
  }
  auto fitted = model::fit(X, labels, options);
  fitted.model.pooling = ds.pooling;
  if (config.standardize) {
    fitted.model = model::fold_standardization(fitted.model, mean, scale);
  }
  return {std::move(fitted.model), fitted.report};
}

FitSummary summarize(std::string label, const model::FitReport& r) {
  return {std::move(label), r.converged, r.iterations, r.final_objective,
          r.grad_inf_norm};
}

std::vector<std::string> labels_for(const SnippetDataset& ds,
                                    const std::vector<Eigen::Index>& rows,
                                    LabelLevel level) {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(label_at(ds, static_cast<std::size_t>(r), level));
  return out;
}

std::vector<std::string> layout_order(const SnippetDataset& ds, LabelLevel level) {
  switch (level) {
    case LabelLevel::kDialect: return ds.dialects();
    case LabelLevel::kLanguage: return ds.languages();
    case LabelLevel::kFile: {
      std::vector<std::string> out;
      std::set<std::string> seen;
      for (const auto& l : ds.labels) {
        if (seen.insert(l.file_id).second) out.push_back(l.file_id);
      }
      return out;
    }
  }
  return {};
}

std::map<std::string, int> count_labels(const std::vector<std::string>& labels) {
  std::map<std::string, int> out;
  for (const auto& l : labels) ++out[l];
  return out;
}

// Fit on train, evaluate on test, with per-snippet labels given by `label_of`.
template <typename LabelOf>
ProtocolResult fit_and_evaluate(const SnippetDataset& ds, const SplitPlan& plan,
                                LabelOf label_of,
                                const std::vector<std::string>& order,
                                const ProtocolConfig& config) {
  std::vector<std::string> train_labels, gold;
  for (auto r : plan.train) train_labels.push_back(label_of(static_cast<std::size_t>(r)));
  for (auto r : plan.test) gold.push_back(label_of(static_cast<std::size_t>(r)));

  auto probe = train_probe(ds, plan.train, train_labels, config,
                           derive_seed(config.seed, "fit"));
  const auto pred = probe.model.predict_labels(gather_rows(ds.vectors, plan.test));

  ProtocolResult result;
  result.config = config;
  result.report = metrics::per_class_prf(gold, pred, order);
  result.train_support = count_labels(train_labels);
  result.fits.push_back(summarize("", probe.report));
  result.model = std::move(probe.model);
  return result;
}

SplitPlan split_for(const SnippetDataset& ds, const ProtocolConfig& config) {
  switch (config.regime) {
    case Regime::kUtterance:
      return utterance_split(ds, config.test_fraction, config.seed);
    case Regime::kFile:
      return file_split(ds, config.test_fraction, config.seed);
    case Regime::kHeldoutDialects:
      break;
  }
  throw ValidationError("regime 'heldout_dialects' is only valid for the "
                        "language_id_heldout setting");
}

}  // namespace

std::string_view to_string(Regime regime) {
  for (const auto& [r, name] : kRegimeNames) {
    if (r == regime) return name;
  }
  return "?";
}

std::string_view to_string(Setting setting) {
  for (const auto& [s, name] : kSettingNames) {
    if (s == setting) return name;
  }
  return "?";
}

Regime parse_regime(std::string_view name) {
  for (const auto& [r, n] : kRegimeNames) {
    if (n == name) return r;
  }
  throw ParseError("unknown regime '" + std::string(name) + "'");
}

Setting parse_setting(std::string_view name) {
  for (const auto& [s, n] : kSettingNames) {
    if (n == name) return s;
  }
  throw ParseError("unknown setting '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Splits

int clamped_test_count(int n, double test_fraction) {
  const int raw = static_cast<int>(std::lround(test_fraction * n));
  return std::clamp(raw, 1, n - 1);
}

SplitPlan utterance_split(const SnippetDataset& ds, double test_fraction,
                          std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test_fraction must lie in (0, 1)");
  }
  SplitPlan plan;
  plan.regime = Regime::kUtterance;
  plan.seed = seed;
  for (const auto& dialect : ds.dialects()) {
    auto idx = indices_of_dialect(ds, dialect);
    if (idx.empty()) continue;  // every file of the dialect was too short
    if (idx.size() < 2) {
      throw ValidationError("utterance split: dialect '" + dialect +
                            "' has fewer than 2 snippets");
    }
    seeded_shuffle(idx, derive_seed(seed, "utterance_split", dialect));
    const auto n_test = static_cast<std::size_t>(
        clamped_test_count(static_cast<int>(idx.size()), test_fraction));
    plan.test.insert(plan.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    plan.train.insert(plan.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.test.begin(), plan.test.end());
  return plan;
}

SplitPlan file_split(const SnippetDataset& ds, double test_fraction,
                     std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test_fraction must lie in (0, 1)");
  }
  SplitPlan plan;
  plan.regime = Regime::kFile;
  plan.seed = seed;
  for (const auto& dialect : ds.dialects()) {
    const auto idx = indices_of_dialect(ds, dialect);
    if (idx.empty()) continue;
    std::vector<std::string> files;
    for (auto i : idx) {
      const auto& f = ds.labels[static_cast<std::size_t>(i)].file_id;
      if (std::find(files.begin(), files.end(), f) == files.end()) files.push_back(f);
    }
    if (files.size() < 2) {
      throw ValidationError("file split: dialect '" + dialect +
                            "' has fewer than 2 files with snippets");
    }
    seeded_shuffle(files, derive_seed(seed, "file_split", dialect));
    const auto n_test = static_cast<std::size_t>(
        clamped_test_count(static_cast<int>(files.size()), test_fraction));
    const std::set<std::string> test_files(files.begin(),
                                           files.begin() + static_cast<std::ptrdiff_t>(n_test));
    for (auto i : idx) {
      const auto& f = ds.labels[static_cast<std::size_t>(i)].file_id;
      (test_files.count(f) ? plan.test : plan.train).push_back(i);
    }
  }
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.test.begin(), plan.test.end());
  return plan;
}

void check_split(const SnippetDataset& ds, const SplitPlan& plan,
                 const std::vector<std::string>& heldout_dialects) {
  std::set<Eigen::Index> train(plan.train.begin(), plan.train.end());
  for (auto i : plan.test) {
    if (train.count(i)) {
      throw ValidationError("split: snippet " + std::to_string(i) +
                            " is on both sides");
    }
  }
  for (auto i : train) {
    if (i < 0 || i >= ds.size()) throw ValidationError("split: index out of range");
  }
  if (plan.regime == Regime::kFile) {
    std::set<std::string> train_files;
    for (auto i : plan.train) train_files.insert(ds.labels[static_cast<std::size_t>(i)].file_id);
    for (auto i : plan.test) {
      const auto& f = ds.labels[static_cast<std::size_t>(i)].file_id;
      if (train_files.count(f)) {
        throw ValidationError("split: file '" + f + "' is on both sides");
      }
    }
  }
  if (plan.regime == Regime::kHeldoutDialects) {
    const std::set<std::string> held(heldout_dialects.begin(), heldout_dialects.end());
    for (auto i : plan.train) {
      const auto& d = ds.labels[static_cast<std::size_t>(i)].dialect;
      if (held.count(d)) {
        throw ValidationError("split: held-out dialect '" + d + "' in train");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Settings

const metrics::EvalReport& ProtocolResult::eval() const {
  return std::get<metrics::EvalReport>(report);
}

const metrics::LabelDistribution& ProtocolResult::distribution() const {
  return std::get<metrics::LabelDistribution>(report);
}

ProtocolResult run_identification(const SnippetDataset& ds, LabelLevel level,
                                  const ProtocolConfig& config) {
  const SplitPlan plan = split_for(ds, config);
  check_split(ds, plan);
  return fit_and_evaluate(
      ds, plan, [&](std::size_t i) { return label_at(ds, i, level); },
      layout_order(ds, level), config);
}

ProtocolResult run_file_control(const SnippetDataset& ds,
                                const ProtocolConfig& config) {
  return run_identification(ds, LabelLevel::kFile, config);
}

ProtocolResult run_language_id_heldout(const SnippetDataset& ds,
                                       const ProtocolConfig& config) {
  // Dialects with at least one snippet, grouped by language in layout order.
  std::vector<std::string> languages;
  std::map<std::string, std::vector<std::string>> members;
  for (const auto& d : ds.dialects()) {
    if (indices_of_dialect(ds, d).empty()) continue;
    const auto l = ds.language_of(d);
    if (!members.count(l)) languages.push_back(l);
    members[l].push_back(d);
  }

  std::vector<std::string> heldout;
  std::vector<std::string> test_languages;
  for (const auto& l : languages) {
    const auto& ds_of_l = members[l];
    if (ds_of_l.size() < 2) continue;
    const auto pick = seeded_choice(ds_of_l.size(),
                                    derive_seed(config.seed, "heldout", l));
    heldout.push_back(ds_of_l[pick]);
    test_languages.push_back(l);
  }
  if (heldout.empty()) {
    throw ValidationError("held-out language ID needs a language with at "
                          "least two dialects");
  }

  SplitPlan plan;
  plan.regime = Regime::kHeldoutDialects;
  plan.seed = config.seed;
  const std::set<std::string> held(heldout.begin(), heldout.end());
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    (held.count(ds.labels[i].dialect) ? plan.test : plan.train)
        .push_back(static_cast<Eigen::Index>(i));
  }
  check_split(ds, plan, heldout);

  ProtocolConfig cfg = config;
  cfg.regime = Regime::kHeldoutDialects;
  auto result = fit_and_evaluate(
      ds, plan, [&](std::size_t i) { return ds.labels[i].language; },
      test_languages, cfg);
  result.heldout = std::move(heldout);
  return result;
}

ProtocolResult run_similarity(const SnippetDataset& ds,
                              const ProtocolConfig& config) {
  const auto dialects = ds.dialects();
  if (dialects.size() < 3) {
    throw ValidationError("similarity needs at least 3 dialects");
  }
  ProtocolResult result;
  result.config = config;
  metrics::LabelDistribution dist;
  dist.columns = dialects;

  for (const auto& target : dialects) {
    SplitPlan plan;
    plan.regime = Regime::kHeldoutDialects;
    plan.seed = config.seed;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
      (ds.labels[i].dialect == target ? plan.test : plan.train)
          .push_back(static_cast<Eigen::Index>(i));
    }
    if (plan.test.empty()) continue;  // no snippets: no row
    check_split(ds, plan, {target});

    const auto train_labels = labels_for(ds, plan.train, LabelLevel::kDialect);
    auto probe = train_probe(ds, plan.train, train_labels, config,
                             derive_seed(config.seed, "fit", target));
    const auto pred = probe.model.predict_labels(gather_rows(ds.vectors, plan.test));
    dist.rows.push_back({target, metrics::label_distribution(pred, dist.columns),
                         static_cast<int>(pred.size())});
    result.fits.push_back(summarize(target, probe.report));
  }
  result.report = std::move(dist);
  return result;
}

ProtocolResult run_group_control(const SnippetDataset& ds,
                                 const ProtocolConfig& config) {
  auto dialects = ds.dialects();
  // Without explicit sizes the groups mirror the language sizes.
  std::vector<int> sizes = config.group_sizes;
  if (sizes.empty()) {
    for (const auto& lang : ds.languages()) {
      sizes.push_back(static_cast<int>(std::count_if(
          dialects.begin(), dialects.end(),
          [&](const std::string& d) { return ds.language_of(d) == lang; })));
    }
  }
  const int total = std::accumulate(sizes.begin(), sizes.end(), 0);
  if (std::any_of(sizes.begin(), sizes.end(), [](int s) { return s <= 0; }) ||
      total != static_cast<int>(dialects.size())) {
    throw ValidationError("group_sizes must be positive and sum to the number "
                          "of dialects (" + std::to_string(dialects.size()) + ")");
  }
  seeded_shuffle(dialects, derive_seed(config.seed, "groups"));

  std::vector<std::vector<std::string>> groups;
  std::vector<std::string> group_names;
  std::map<std::string, std::string> group_of;
  std::size_t next = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const std::string name = "group-" + std::to_string(g + 1);
    group_names.push_back(name);
    groups.emplace_back();
    for (int k = 0; k < sizes[g]; ++k) {
      groups.back().push_back(dialects[next]);
      group_of[dialects[next]] = name;
      ++next;
    }
  }

  ProtocolConfig cfg = config;
  cfg.regime = Regime::kUtterance;
  cfg.group_sizes = sizes;
  const SplitPlan plan = utterance_split(ds, cfg.test_fraction, cfg.seed);
  check_split(ds, plan);
  auto result = fit_and_evaluate(
      ds, plan, [&](std::size_t i) { return group_of.at(ds.labels[i].dialect); },
      group_names, cfg);
  result.groups = std::move(groups);
  return result;
}

ProtocolResult run_protocol(const SnippetDataset& ds,
                            const ProtocolConfig& config) {
  switch (config.setting) {
    case Setting::kDialectId:
      return run_identification(ds, LabelLevel::kDialect, config);
    case Setting::kLanguageId:
      return run_identification(ds, LabelLevel::kLanguage, config);
    case Setting::kLanguageIdHeldout:
      return run_language_id_heldout(ds, config);
    case Setting::kSimilarity:
      return run_similarity(ds, config);
    case Setting::kControlFile:
      return run_file_control(ds, config);
    case Setting::kControlGroups:
      return run_group_control(ds, config);
  }
  throw ValidationError("unknown setting");
}

// ---------------------------------------------------------------------------
// Run specs and serialization

ProtocolConfig parse_run_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("run spec: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("run spec: top level must be an object");

  ProtocolConfig c;
  const auto field = [&](const char* key) -> const json* {
    auto it = doc.find(key);
    return it == doc.end() || it->is_null() ? nullptr : &*it;
  };
  try {
    if (auto* v = field("setting")) {
      c.setting = parse_setting(v->get<std::string>());
    } else {
      throw ParseError("run spec: missing field 'setting'");
    }
    if (auto* v = field("regime")) c.regime = parse_regime(v->get<std::string>());
    if (auto* v = field("pooling")) c.pooling = parse_pooling(v->get<std::string>());
    if (auto* v = field("C")) c.C = v->get<double>();
    if (auto* v = field("seed")) c.seed = v->get<std::uint64_t>();
    if (auto* v = field("test_fraction")) c.test_fraction = v->get<double>();
    if (auto* v = field("group_sizes")) c.group_sizes = v->get<std::vector<int>>();
    if (auto* v = field("standardize")) c.standardize = v->get<bool>();
    if (auto* v = field("tol")) c.tol = v->get<double>();
    if (auto* v = field("max_iter")) c.max_iter = v->get<int>();
    if (auto* v = field("window_seconds")) c.window_seconds = v->get<double>();
    if (auto* v = field("keep_partial_if_at_least")) {
      c.keep_partial_if_at_least = v->get<double>();
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("run spec: ") + e.what());
  }
  if (!(c.C > 0.0)) throw ValidationError("run spec: 'C' must be positive");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) {
    throw ValidationError("run spec: 'test_fraction' must lie in (0, 1)");
  }
  if (!(c.tol > 0.0)) throw ValidationError("run spec: 'tol' must be positive");
  if (c.max_iter < 1) throw ValidationError("run spec: 'max_iter' must be >= 1");
  if (!(c.window_seconds > 0.0)) {
    throw ValidationError("run spec: 'window_seconds' must be positive");
  }
  return c;
}

namespace {

json config_json(const ProtocolConfig& c) {
  json j = {{"setting", std::string(to_string(c.setting))},
            {"regime", std::string(to_string(c.regime))},
            {"pooling", std::string(to_string(c.pooling))},
            {"C", c.C},
            {"seed", c.seed},
            {"test_fraction", c.test_fraction},
            {"standardize", c.standardize},
            {"tol", c.tol},
            {"max_iter", c.max_iter},
            {"window_seconds", c.window_seconds},
            {"keep_partial_if_at_least", c.keep_partial_if_at_least}};
  if (!c.group_sizes.empty()) j["group_sizes"] = c.group_sizes;
  return j;
}

json scores_json(const metrics::Scores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

}  // namespace

std::string run_spec_to_json(const ProtocolConfig& config) {
  return config_json(config).dump(2) + "\n";
}

std::string result_to_tsv(const ProtocolResult& result) {
  if (std::holds_alternative<metrics::LabelDistribution>(result.report)) {
    return metrics::to_tsv(result.distribution());
  }
  return metrics::to_tsv(result.eval(), result.train_support);
}

std::string result_to_json(const ProtocolResult& result) {
  json doc;
  doc["config"] = config_json(result.config);
  if (std::holds_alternative<metrics::EvalReport>(result.report)) {
    const auto& r = result.eval();
    json rows = json::array();
    for (const auto& c : r.per_class) {
      json row = scores_json(c.scores);
      row["label"] = c.label;
      row["support"] = c.support;
      rows.push_back(std::move(row));
    }
    doc["report"] = {{"per_class", std::move(rows)},
                     {"macro", scores_json(r.macro)},
                     {"n_test", r.n_test}};
  } else {
    const auto& d = result.distribution();
    json rows = json::array();
    for (const auto& row : d.rows) {
      rows.push_back({{"heldout", row.label},
                      {"percent", row.percent},
                      {"n_predictions", row.n_predictions}});
    }
    doc["report"] = {{"columns", d.columns}, {"rows", std::move(rows)}};
  }
  doc["train_support"] = result.train_support;
  if (!result.heldout.empty()) doc["heldout"] = result.heldout;
  if (!result.groups.empty()) doc["groups"] = result.groups;
  json fits = json::array();
  for (const auto& f : result.fits) {
    fits.push_back({{"label", f.label},
                    {"converged", f.converged},
                    {"iterations", f.iterations},
                    {"final_objective", f.final_objective},
                    {"grad_inf_norm", f.grad_inf_norm}});
  }
  doc["fits"] = std::move(fits);
  return doc.dump(2) + "\n";
}

}  // namespace lectometer::protocols
