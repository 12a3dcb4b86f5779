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

#include <string>
#include <vector>

#include <Eigen/Core>

#include "lectometer/common.hpp"
#include "lectometer/corpus.hpp"

namespace lectometer::snippets {

// Half-open frame range [begin, begin + length) within one file.
struct FrameSlice {
  Eigen::Index begin = 0;
  Eigen::Index length = 0;
};

struct SegmentOptions {
  double window_seconds = 5.0;
  // A trailing partial window is kept iff its length >= this fraction of a
  // full window.
  double keep_partial_if_at_least = 0.5;
};

struct Segmentation {
  Eigen::Index window_frames = 0;
  std::vector<FrameSlice> slices;
  Eigen::Index dropped_frames = 0;  // tail frames not covered by any slice
};

// Non-overlapping, frame-aligned windows of round(window_seconds * rate)
// frames. Throws ValidationError if the window is shorter than one frame.
Segmentation segment_frames(const corpus::FrameMatrix& matrix,
                            const SegmentOptions& options = {});

/// Reduces a block of frames (rows) to one vector, component-wise.
/// Accepts any Eigen dense expression; computation is done in double.
template <typename Derived>
Eigen::VectorXd pool_frames(const Eigen::MatrixBase<Derived>& frames,
                            Pooling pooling) {
  if (frames.rows() < 1) throw ValidationError("cannot pool an empty slice");
  const auto promoted = frames.template cast<double>();
  if (pooling == Pooling::kMax) {
    return promoted.colwise().maxCoeff().transpose();
  }
  return promoted.colwise().mean().transpose();
}

Eigen::VectorXd pool_snippet(const corpus::FrameMatrix& matrix,
                             const FrameSlice& slice, Pooling pooling);

struct SnippetLabel {
  std::string file_id;
  std::string dialect;
  std::string language;
  int index = 0;  // position within the file
  Eigen::Index n_source_frames = 0;
};

struct SegmentationWarning {
  std::string file_id;
  Eigen::Index n_frames = 0;
  Eigen::Index window_frames = 0;
};

struct SnippetDataset {
  Eigen::MatrixXd vectors;  // one pooled snippet per row
  std::vector<SnippetLabel> labels;
  Pooling pooling = Pooling::kMax;
  // Files that produced no snippet at all.
  std::vector<SegmentationWarning> warnings;
  // Dialect -> language in corpus order, including files that produced no
  // snippets, so reports keep the corpus layout.
  std::vector<std::pair<std::string, std::string>> dialect_layout;

  Eigen::Index size() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
  std::vector<std::string> dialects() const;
  std::vector<std::string> languages() const;
  std::string language_of(const std::string& dialect) const;
};

// Concatenates pooled snippets file by file in input order, then by slice
// index. Throws ValidationError when the files disagree on dim.
SnippetDataset build_dataset(const std::vector<corpus::FrameMatrix>& corpus,
                             Pooling pooling = Pooling::kMax,
                             const SegmentOptions& options = {});

}  // namespace lectometer::snippets
