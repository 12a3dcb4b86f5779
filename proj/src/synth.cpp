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

#include "lectometer/synth.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "json.hpp"

namespace lectometer::synth {

using nlohmann::json;

std::vector<LanguageSpec> reference_layout() {
  return {
      {"Nepali", {"Achhami", "Dotyal"}},
      {"Lyngam", {"Langkma", "Nongtrei"}},
      {"Na-našu", {"Acquaviva Collecroce", "Montemitro", "San Felice del Molise"}},
      {"War", {"Amwi", "Nongtalang"}},
      {"Na", {"Lataddi Na", "Yongning Na"}},
      {"Naxi", {"Naxi"}},
      {"Laze", {"Laze"}},
  };
}

void validate(const SynthSpec& spec) {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw ValidationError("synth spec: '" + field + "' " + why);
  };
  if (spec.languages.empty()) fail("languages", "must not be empty");
  std::set<std::string> dialects;
  for (const auto& l : spec.languages) {
    if (l.name.empty()) fail("languages", "contains an unnamed language");
    if (l.dialects.empty()) fail("languages", "language '" + l.name + "' has no dialects");
    for (const auto& d : l.dialects) {
      if (d.empty()) fail("languages", "contains an empty dialect name");
      if (!dialects.insert(d).second) fail("languages", "repeats dialect '" + d + "'");
    }
  }
  if (spec.dim <= 0) fail("dim", "must be positive");
  if (!(spec.language_centroid_scale > 0.0)) fail("language_centroid_scale", "must be positive");
  if (!(spec.dialect_offset_scale > 0.0)) fail("dialect_offset_scale", "must be positive");
  if (!(spec.within_dialect_noise > 0.0)) fail("within_dialect_noise", "must be positive");
  if (spec.files_per_dialect < 2) fail("files_per_dialect", "must be at least 2");
  if (!(spec.frame_rate_hz > 0.0) || !std::isfinite(spec.frame_rate_hz)) {
    fail("frame_rate_hz", "must be positive");
  }
  const long long min_frames = std::llround(5.0 * spec.frame_rate_hz);
  if (spec.frames_per_file < std::max(1LL, min_frames)) {
    fail("frames_per_file", "must cover at least one 5 s window (" +
                                std::to_string(min_frames) + " frames)");
  }
}

SynthSpec parse_synth_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("synth spec: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("synth spec: top level must be an object");
  SynthSpec s;
  const auto get = [&](const char* key, auto& target) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    try {
      it->get_to(target);
    } catch (const json::exception&) {
      throw ParseError(std::string("synth spec: field '") + key + "' has the wrong type");
    }
  };
  if (auto it = doc.find("languages"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("synth spec: field 'languages' must be an array");
    s.languages.clear();
    for (const auto& l : *it) {
      try {
        s.languages.push_back({l.at("name").get<std::string>(),
                               l.at("dialects").get<std::vector<std::string>>()});
      } catch (const json::exception&) {
        throw ParseError("synth spec: field 'languages' entries need 'name' and 'dialects'");
      }
    }
  }
  get("dim", s.dim);
  get("language_centroid_scale", s.language_centroid_scale);
  get("dialect_offset_scale", s.dialect_offset_scale);
  get("within_dialect_noise", s.within_dialect_noise);
  get("files_per_dialect", s.files_per_dialect);
  get("frames_per_file", s.frames_per_file);
  get("frame_rate_hz", s.frame_rate_hz);
  get("seed", s.seed);
  validate(s);
  return s;
}

std::string synth_spec_to_json(const SynthSpec& s) {
  json langs = json::array();
  for (const auto& l : s.languages) langs.push_back({{"name", l.name}, {"dialects", l.dialects}});
  json doc = {{"languages", std::move(langs)},
              {"dim", s.dim},
              {"language_centroid_scale", s.language_centroid_scale},
              {"dialect_offset_scale", s.dialect_offset_scale},
              {"within_dialect_noise", s.within_dialect_noise},
              {"files_per_dialect", s.files_per_dialect},
              {"frames_per_file", s.frames_per_file},
              {"frame_rate_hz", s.frame_rate_hz},
              {"seed", s.seed}};
  return doc.dump(2) + "\n";
}

namespace {

std::string slug(const std::string& name) {
  std::string out;
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (c < 0x80) {
      if (!out.empty() && out.back() != '_') out.push_back('_');
    } else {
      out.push_back(static_cast<char>(c));  // keep UTF-8 bytes as-is
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

Eigen::VectorXd gaussian(std::mt19937_64& rng, int dim, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

SynthCorpus generate_corpus(const SynthSpec& spec) {
  validate(spec);
  SynthCorpus out;
  out.manifest.dim = spec.dim;

  std::mt19937_64 centroid_rng(derive_seed(spec.seed, "synth_centroids"));
  for (const auto& lang : spec.languages) {
    const Eigen::VectorXd centre =
        gaussian(centroid_rng, spec.dim, spec.language_centroid_scale);
    for (const auto& d : lang.dialects) {
      out.centroids.push_back(
          {d, lang.name, centre + gaussian(centroid_rng, spec.dim, spec.dialect_offset_scale)});
    }
  }

  for (const auto& c : out.centroids) {
    const std::string stem = slug(c.dialect);
    for (int f = 0; f < spec.files_per_dialect; ++f) {
      corpus::FrameMatrix m;
      m.file_id = stem + "_" + std::to_string(f + 1);
      m.dialect = c.dialect;
      m.language = c.language;
      m.frame_rate_hz = static_cast<float>(spec.frame_rate_hz);
      std::mt19937_64 rng(derive_seed(spec.seed, "synth_frames", m.file_id));
      std::normal_distribution<double> noise(0.0, spec.within_dialect_noise);
      m.frames.resize(spec.frames_per_file, spec.dim);
      for (int t = 0; t < spec.frames_per_file; ++t) {
        for (int k = 0; k < spec.dim; ++k) {
          m.frames(t, k) = static_cast<float>(c.mean(k) + noise(rng));
        }
      }
      out.manifest.entries.push_back(
          {m.file_id + ".lfm", m.file_id, m.dialect, m.language, std::nullopt, std::nullopt});
      out.matrices.push_back(std::move(m));
    }
  }
  corpus::validate_manifest(out.manifest);
  return out;
}

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  for (std::size_t i = 0; i < corpus.matrices.size(); ++i) {
    corpus::write_frame_matrix(corpus.matrices[i], dir / corpus.manifest.entries[i].path);
  }
  corpus::write_manifest(corpus.manifest, dir / "manifest.json");
}

std::map<std::string, std::string> oracle_nearest_sibling(
    const std::vector<DialectCentroid>& centroids) {
  std::map<std::string, std::string> out;
  if (centroids.size() < 2) return out;
  for (const auto& a : centroids) {
    const DialectCentroid* best = nullptr;
    double best_dist = 0.0;
    for (const auto& b : centroids) {
      if (&a == &b) continue;
      const double dist = (a.mean - b.mean).squaredNorm();
      if (!best || dist < best_dist ||
          (dist == best_dist && b.dialect < best->dialect)) {
        best = &b;
        best_dist = dist;
      }
    }
    out[a.dialect] = best->dialect;
  }
  return out;
}

}  // namespace lectometer::synth
