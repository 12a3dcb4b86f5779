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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lectometer/common.hpp"

namespace lectometer::corpus {

// Frames are stored at payload precision; pooling promotes to double.
using FrameStorage =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FrameMatrix {
  std::string file_id;
  std::string dialect;
  std::string language;
  std::optional<std::string> speaker;
  std::optional<std::string> genre;
  double frame_rate_hz = 0.0;
  FrameStorage frames;  // n_frames x dim

  Eigen::Index n_frames() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
  double duration_seconds() const {
    return static_cast<double>(n_frames()) / frame_rate_hz;
  }
};

// Throws ValidationError unless the matrix has n >= 1, dim >= 1, a positive
// frame rate and only finite entries.
void check_frame_matrix(const FrameMatrix& m);

struct ManifestEntry {
  std::string path;  // relative paths resolve against the manifest directory
  std::string file_id;
  std::string dialect;
  std::string language;
  std::optional<std::string> speaker;
  std::optional<std::string> genre;
};

struct CorpusManifest {
  int dim = 0;
  std::vector<ManifestEntry> entries;
  // Directory used to resolve relative entry paths; empty means cwd.
  std::filesystem::path base_dir;

  // Dialects in order of first appearance.
  std::vector<std::string> dialects() const;
  // Languages in order of first appearance.
  std::vector<std::string> languages() const;
  std::string language_of(const std::string& dialect) const;
  std::filesystem::path resolve(const ManifestEntry& entry) const;
};

// Checks entry count, dim, file_id uniqueness and that every dialect maps to
// a single language. Throws ValidationError.
void validate_manifest(const CorpusManifest& manifest);

CorpusManifest parse_manifest(const std::string& json_text,
                              std::filesystem::path base_dir = {});
CorpusManifest load_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const CorpusManifest& manifest);
void write_manifest(const CorpusManifest& manifest,
                    const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// LFM binary format, all fields little-endian, no padding:
//
//   magic "LFM1" (4 bytes) | version u32 = 1 | n_frames u32 | dim u32 |
//   frame_rate_hz f32 | payload n_frames*dim f32, row-major
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kLfmVersion = 1;
inline constexpr std::size_t kLfmHeaderBytes = 20;

class FormatError : public Error {
 public:
  enum class Kind { kBadMagic, kBadVersion, kDimMismatch, kTruncated,
                    kNonFinite, kBadHeader };
  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::vector<char> encode_lfm(const FrameMatrix& matrix);
// Labels of the returned matrix are left empty.
FrameMatrix decode_lfm(const std::vector<char>& bytes, int expected_dim);

FrameMatrix read_frame_matrix(const std::filesystem::path& path,
                              int expected_dim);
void write_frame_matrix(const FrameMatrix& matrix,
                        const std::filesystem::path& path);

// Reads every entry of the manifest and attaches its labels. Errors name the
// offending file_id.
std::vector<FrameMatrix> load_corpus(const CorpusManifest& manifest);

}  // namespace lectometer::corpus
