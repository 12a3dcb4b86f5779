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

#include "lectometer/corpus.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace lectometer::corpus {

using nlohmann::json;

void check_frame_matrix(const FrameMatrix& m) {
  if (m.frames.rows() < 1 || m.frames.cols() < 1) {
    throw ValidationError("frame matrix '" + m.file_id +
                          "' must have at least one frame and one component");
  }
  if (!(m.frame_rate_hz > 0.0) || !std::isfinite(m.frame_rate_hz)) {
    throw ValidationError("frame matrix '" + m.file_id +
                          "' has non-positive frame rate");
  }
  if (!m.frames.allFinite()) {
    throw ValidationError("frame matrix '" + m.file_id +
                          "' contains non-finite values");
  }
}

std::vector<std::string> CorpusManifest::dialects() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (seen.insert(e.dialect).second) out.push_back(e.dialect);
  }
  return out;
}

std::vector<std::string> CorpusManifest::languages() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (seen.insert(e.language).second) out.push_back(e.language);
  }
  return out;
}

std::string CorpusManifest::language_of(const std::string& dialect) const {
  for (const auto& e : entries) {
    if (e.dialect == dialect) return e.language;
  }
  throw ValidationError("unknown dialect '" + dialect + "'");
}

std::filesystem::path CorpusManifest::resolve(const ManifestEntry& e) const {
  std::filesystem::path p(e.path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

void validate_manifest(const CorpusManifest& manifest) {
  if (manifest.dim <= 0) {
    throw ValidationError("manifest: dim must be positive, got " +
                          std::to_string(manifest.dim));
  }
  if (manifest.entries.empty()) {
    throw ValidationError("manifest: entry list is empty");
  }
  std::set<std::string> ids;
  std::map<std::string, std::string> language_of;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    const std::string where = "manifest entry " + std::to_string(i);
    if (e.file_id.empty() || e.dialect.empty() || e.language.empty() ||
        e.path.empty()) {
      throw ValidationError(where + ": path, file_id, dialect and language "
                                    "must be non-empty");
    }
    if (!ids.insert(e.file_id).second) {
      throw ValidationError(where + ": duplicate file_id '" + e.file_id + "'");
    }
    auto [it, inserted] = language_of.emplace(e.dialect, e.language);
    if (!inserted && it->second != e.language) {
      throw ValidationError(where + ": dialect '" + e.dialect +
                            "' mapped to both '" + it->second + "' and '" +
                            e.language + "'");
    }
  }
}

namespace {

std::string required_string(const json& obj, const char* key,
                            const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  if (!it->is_string()) {
    throw ParseError(where + ": field '" + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key,
                                           const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ParseError(where + ": field '" + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

CorpusManifest parse_manifest(const std::string& json_text,
                              std::filesystem::path base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("manifest: top level must be an object");
  auto dim = doc.find("dim");
  if (dim == doc.end() || !dim->is_number_integer()) {
    throw ParseError("manifest: 'dim' must be an integer");
  }
  auto entries = doc.find("entries");
  if (entries == doc.end() || !entries->is_array()) {
    throw ParseError("manifest: 'entries' must be an array");
  }

  CorpusManifest m;
  m.base_dir = std::move(base_dir);
  const auto dim_value = dim->get<long long>();
  m.dim = dim_value > 0 && dim_value < (1LL << 31) ? static_cast<int>(dim_value)
                                                   : 0;
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const json& e = (*entries)[i];
    const std::string where = "manifest entry " + std::to_string(i);
    if (!e.is_object()) throw ParseError(where + ": must be an object");
    m.entries.push_back({required_string(e, "path", where),
                         required_string(e, "file_id", where),
                         required_string(e, "dialect", where),
                         required_string(e, "language", where),
                         optional_string(e, "speaker", where),
                         optional_string(e, "genre", where)});
  }
  validate_manifest(m);
  return m;
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text(path), path.parent_path());
}

std::string manifest_to_json(const CorpusManifest& manifest) {
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    json j = {{"path", e.path},
              {"file_id", e.file_id},
              {"dialect", e.dialect},
              {"language", e.language}};
    if (e.speaker) j["speaker"] = *e.speaker;
    if (e.genre) j["genre"] = *e.genre;
    entries.push_back(std::move(j));
  }
  json doc = {{"dim", manifest.dim}, {"entries", std::move(entries)}};
  return doc.dump(2) + "\n";
}

void write_manifest(const CorpusManifest& manifest,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << manifest_to_json(manifest);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// LFM

namespace {

void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return v;
}

}  // namespace

std::vector<char> encode_lfm(const FrameMatrix& matrix) {
  check_frame_matrix(matrix);
  const auto n = static_cast<std::uint32_t>(matrix.n_frames());
  const auto dim = static_cast<std::uint32_t>(matrix.dim());
  std::vector<char> out;
  out.reserve(kLfmHeaderBytes + std::size_t{4} * n * dim);
  for (char c : {'L', 'F', 'M', '1'}) out.push_back(c);
  put_u32(out, kLfmVersion);
  put_u32(out, n);
  put_u32(out, dim);
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(matrix.frame_rate_hz)));
  // FrameStorage is row-major, so data() is already in payload order.
  const float* data = matrix.frames.data();
  for (std::size_t i = 0; i < std::size_t{n} * dim; ++i) {
    put_u32(out, std::bit_cast<std::uint32_t>(data[i]));
  }
  return out;
}

FrameMatrix decode_lfm(const std::vector<char>& bytes, int expected_dim) {
  using Kind = FormatError::Kind;
  if (bytes.size() < kLfmHeaderBytes) {
    throw FormatError(Kind::kTruncated, "LFM header truncated");
  }
  if (std::memcmp(bytes.data(), "LFM1", 4) != 0) {
    throw FormatError(Kind::kBadMagic, "bad LFM magic");
  }
  const char* p = bytes.data();
  const std::uint32_t version = get_u32(p + 4);
  if (version != kLfmVersion) {
    throw FormatError(Kind::kBadVersion,
                      "unsupported LFM version " + std::to_string(version));
  }
  const std::uint32_t n = get_u32(p + 8);
  const std::uint32_t dim = get_u32(p + 12);
  const float rate = std::bit_cast<float>(get_u32(p + 16));
  if (n == 0 || dim == 0 || !(rate > 0.0f) || !std::isfinite(rate)) {
    throw FormatError(Kind::kBadHeader, "LFM header has n_frames=" +
                                            std::to_string(n) + ", dim=" +
                                            std::to_string(dim));
  }
  if (static_cast<long long>(dim) != expected_dim) {
    throw FormatError(Kind::kDimMismatch,
                      "LFM dim " + std::to_string(dim) + " != expected " +
                          std::to_string(expected_dim));
  }
  const std::size_t payload = std::size_t{4} * n * dim;
  if (bytes.size() - kLfmHeaderBytes < payload) {
    throw FormatError(Kind::kTruncated,
                      "LFM payload truncated: expected " +
                          std::to_string(payload) + " bytes, found " +
                          std::to_string(bytes.size() - kLfmHeaderBytes));
  }
  if (bytes.size() - kLfmHeaderBytes > payload) {
    throw FormatError(Kind::kBadHeader,
                      "LFM has " +
                          std::to_string(bytes.size() - kLfmHeaderBytes - payload) +
                          " trailing bytes after the payload");
  }

  FrameMatrix m;
  m.frame_rate_hz = rate;
  m.frames.resize(n, dim);
  float* data = m.frames.data();
  for (std::size_t i = 0; i < std::size_t{n} * dim; ++i) {
    data[i] = std::bit_cast<float>(get_u32(p + kLfmHeaderBytes + 4 * i));
  }
  if (!m.frames.allFinite()) {
    throw FormatError(Kind::kNonFinite, "LFM payload contains non-finite values");
  }
  return m;
}

FrameMatrix read_frame_matrix(const std::filesystem::path& path,
                              int expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  try {
    return decode_lfm(bytes, expected_dim);
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path.string() + ": " + e.what());
  }
}

void write_frame_matrix(const FrameMatrix& matrix,
                        const std::filesystem::path& path) {
  const auto bytes = encode_lfm(matrix);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<FrameMatrix> load_corpus(const CorpusManifest& manifest) {
  std::vector<FrameMatrix> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    FrameMatrix m;
    try {
      m = read_frame_matrix(manifest.resolve(e), manifest.dim);
    } catch (const FormatError& err) {
      throw FormatError(err.kind(), "file_id '" + e.file_id + "': " + err.what());
    } catch (const Error& err) {
      throw IoError("file_id '" + e.file_id + "': " + err.what());
    }
    m.file_id = e.file_id;
    m.dialect = e.dialect;
    m.language = e.language;
    m.speaker = e.speaker;
    m.genre = e.genre;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace lectometer::corpus
