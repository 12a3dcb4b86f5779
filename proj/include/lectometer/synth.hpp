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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lectometer/corpus.hpp"

namespace lectometer::synth {

struct LanguageSpec {
  std::string name;
  std::vector<std::string> dialects;
};

// Thirteen varieties in seven languages: Nepali (Achhami, Dotyal), Lyngam
// (Langkma, Nongtrei), Na-našu (three villages), War (Amwi, Nongtalang),
// Na (Lataddi Na, Yongning Na), and the single-dialect Naxi and Laze.
std::vector<LanguageSpec> reference_layout();

struct SynthSpec {
  std::vector<LanguageSpec> languages = reference_layout();
  int dim = 32;
  double language_centroid_scale = 10.0;
  double dialect_offset_scale = 3.0;
  double within_dialect_noise = 0.5;
  int files_per_dialect = 5;
  int frames_per_file = 8 * 235;
  double frame_rate_hz = 47.0;
  std::uint64_t seed = 0;
};

// Throws ValidationError naming the offending field.
void validate(const SynthSpec& spec);
SynthSpec parse_synth_spec(const std::string& json_text);
std::string synth_spec_to_json(const SynthSpec& spec);

struct DialectCentroid {
  std::string dialect;
  std::string language;
  Eigen::VectorXd mean;
};

struct SynthCorpus {
  corpus::CorpusManifest manifest;  // paths are bare file names
  std::vector<corpus::FrameMatrix> matrices;
  std::vector<DialectCentroid> centroids;  // realized dialect means
};

/// Isotropic Gaussian hierarchy: language centroid ~ N(0, s_l^2 I), dialect
/// mean = centroid + N(0, s_d^2 I), frame = dialect mean + N(0, s_w^2 I).
/// Files carry no structure of their own. Deterministic per seed.
SynthCorpus generate_corpus(const SynthSpec& spec);

// Writes the manifest as manifest.json plus one LFM file per entry.
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

/// For each dialect, the other dialect whose realized centroid is closest in
/// Euclidean distance; exact ties resolve to the lexicographically first name.
std::map<std::string, std::string> oracle_nearest_sibling(
    const std::vector<DialectCentroid>& centroids);

}  // namespace lectometer::synth
