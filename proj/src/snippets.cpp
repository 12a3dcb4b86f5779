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

#include "lectometer/snippets.hpp"

#include <cmath>
#include <set>

namespace lectometer::snippets {

Segmentation segment_frames(const corpus::FrameMatrix& matrix,
                            const SegmentOptions& options) {
  const double w_real = options.window_seconds * matrix.frame_rate_hz;
  if (!(w_real >= 1.0)) {
    throw ValidationError("snippet window of " +
                          std::to_string(options.window_seconds) +
                          " s is shorter than one frame");
  }
  Segmentation seg;
  seg.window_frames = static_cast<Eigen::Index>(std::llround(w_real));
  const Eigen::Index n = matrix.n_frames();
  const Eigen::Index w = seg.window_frames;

  Eigen::Index begin = 0;
  for (; begin + w <= n; begin += w) seg.slices.push_back({begin, w});
  const Eigen::Index tail = n - begin;
  if (tail > 0 && static_cast<double>(tail) >=
                      options.keep_partial_if_at_least * static_cast<double>(w)) {
    seg.slices.push_back({begin, tail});
  } else {
    seg.dropped_frames = tail;
  }
  return seg;
}

Eigen::VectorXd pool_snippet(const corpus::FrameMatrix& matrix,
                             const FrameSlice& slice, Pooling pooling) {
  return pool_frames(matrix.frames.middleRows(slice.begin, slice.length),
                     pooling);
}

std::vector<std::string> SnippetDataset::dialects() const {
  std::vector<std::string> out;
  for (const auto& [d, l] : dialect_layout) out.push_back(d);
  return out;
}

std::vector<std::string> SnippetDataset::languages() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& [d, l] : dialect_layout) {
    if (seen.insert(l).second) out.push_back(l);
  }
  return out;
}

std::string SnippetDataset::language_of(const std::string& dialect) const {
  for (const auto& [d, l] : dialect_layout) {
    if (d == dialect) return l;
  }
  throw ValidationError("unknown dialect '" + dialect + "'");
}

SnippetDataset build_dataset(const std::vector<corpus::FrameMatrix>& corpus,
                             Pooling pooling, const SegmentOptions& options) {
  SnippetDataset ds;
  ds.pooling = pooling;
  if (corpus.empty()) return ds;

  const Eigen::Index dim = corpus.front().dim();
  std::vector<Segmentation> segs;
  segs.reserve(corpus.size());
  Eigen::Index total = 0;
  std::set<std::string> seen_dialects;
  for (const auto& m : corpus) {
    if (m.dim() != dim) {
      throw ValidationError("file '" + m.file_id + "' has dim " +
                            std::to_string(m.dim()) + ", expected " +
                            std::to_string(dim));
    }
    if (seen_dialects.insert(m.dialect).second) {
      ds.dialect_layout.emplace_back(m.dialect, m.language);
    }
    segs.push_back(segment_frames(m, options));
    total += static_cast<Eigen::Index>(segs.back().slices.size());
    if (segs.back().slices.empty()) {
      ds.warnings.push_back({m.file_id, m.n_frames(), segs.back().window_frames});
    }
  }

  ds.vectors.resize(total, dim);
  ds.labels.reserve(static_cast<std::size_t>(total));
  Eigen::Index row = 0;
  for (std::size_t f = 0; f < corpus.size(); ++f) {
    const auto& m = corpus[f];
    for (std::size_t s = 0; s < segs[f].slices.size(); ++s) {
      const auto& slice = segs[f].slices[s];
      ds.vectors.row(row++) = pool_snippet(m, slice, pooling).transpose();
      ds.labels.push_back({m.file_id, m.dialect, m.language,
                           static_cast<int>(s), slice.length});
    }
  }
  return ds;
}

}  // namespace lectometer::snippets
