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

#include <cstring>

#include "doctest.h"
#include "lectometer/protocols.hpp"
#include "lectometer/snippets.hpp"
#include "lectometer/synth.hpp"
#include "test_util.hpp"

using namespace lectometer;
using namespace lectometer::synth;

namespace {

SynthSpec small_spec() {
  SynthSpec s;
  s.languages = {{"L1", {"a1", "a2"}}, {"L2", {"b1", "b2", "b3"}}, {"L3", {"c"}}};
  s.dim = 6;
  s.files_per_dialect = 2;
  s.frames_per_file = 470;
  s.seed = 17;
  return s;
}

bool same_corpus(const SynthCorpus& a, const SynthCorpus& b) {
  if (a.matrices.size() != b.matrices.size()) return false;
  for (std::size_t i = 0; i < a.matrices.size(); ++i) {
    const auto& x = a.matrices[i].frames;
    const auto& y = b.matrices[i].frames;
    if (x.size() != y.size() ||
        std::memcmp(x.data(), y.data(), sizeof(float) * static_cast<std::size_t>(x.size())) != 0) {
      return false;
    }
  }
  return corpus::manifest_to_json(a.manifest) == corpus::manifest_to_json(b.manifest);
}

}  // namespace

TEST_CASE("reference layout has thirteen dialects in seven languages") {
  const auto layout = reference_layout();
  CHECK(layout.size() == 7);
  std::size_t n = 0;
  for (const auto& l : layout) n += l.dialects.size();
  CHECK(n == 13);
}

TEST_CASE("generated corpus satisfies corpus invariants") {
  const auto c = generate_corpus(small_spec());
  CHECK(c.matrices.size() == 12);
  CHECK(c.manifest.entries.size() == 12);
  CHECK(c.centroids.size() == 6);
  CHECK_NOTHROW(corpus::validate_manifest(c.manifest));
  for (const auto& m : c.matrices) {
    CHECK_NOTHROW(corpus::check_frame_matrix(m));
    CHECK(m.n_frames() == 470);
    CHECK(m.dim() == 6);
    CHECK(m.frame_rate_hz == 47.0);
  }
  CHECK(c.manifest.language_of("b3") == "L2");
  CHECK(c.matrices[0].file_id == "a1_1");
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = generate_corpus(small_spec());
  const auto b = generate_corpus(small_spec());
  CHECK(same_corpus(a, b));
  auto other = small_spec();
  other.seed = 18;
  CHECK_FALSE(same_corpus(a, generate_corpus(other)));
}

TEST_CASE("zero-noise limit pools every snippet of a dialect to one vector") {
  auto spec = small_spec();
  spec.within_dialect_noise = 1e-12;
  const auto c = generate_corpus(spec);
  for (auto pooling : {Pooling::kMax, Pooling::kMean}) {
    const auto ds = snippets::build_dataset(c.matrices, pooling);
    for (std::size_t i = 1; i < ds.labels.size(); ++i) {
      if (ds.labels[i].dialect != ds.labels[0].dialect) continue;
      CHECK((ds.vectors.row(static_cast<Eigen::Index>(i)) - ds.vectors.row(0)).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("frames scatter around the realized dialect means") {
  auto spec = small_spec();
  spec.frames_per_file = 4700;
  const auto c = generate_corpus(spec);
  const Eigen::VectorXd sample_mean =
      c.matrices[0].frames.cast<double>().colwise().mean().transpose();
  // Standard error of the mean is 0.5 / sqrt(4700) ~ 0.0073.
  CHECK((sample_mean - c.centroids[0].mean).cwiseAbs().maxCoeff() < 0.04);
}

TEST_CASE("nearest sibling oracle") {
  std::vector<DialectCentroid> two = {{"x", "L", Eigen::Vector2d(0, 0)},
                                      {"y", "L", Eigen::Vector2d(3, 4)}};
  auto m = oracle_nearest_sibling(two);
  CHECK(m["x"] == "y");
  CHECK(m["y"] == "x");

  std::vector<DialectCentroid> line = {{"B", "L", Eigen::Vector2d(1, 0)},
                                       {"C", "L", Eigen::Vector2d(2, 0)},
                                       {"A", "L", Eigen::Vector2d(0, 0)}};
  m = oracle_nearest_sibling(line);
  CHECK(m["A"] == "B");
  CHECK(m["C"] == "B");
  CHECK(m["B"] == "A");  // tie between A and C

  CHECK(oracle_nearest_sibling({two[0]}).empty());
}

TEST_CASE("tight dialect offsets make siblings nearest") {
  SynthSpec spec;  // reference layout
  spec.language_centroid_scale = 10.0;
  spec.dialect_offset_scale = 0.5;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    spec.seed = seed;
    const auto c = generate_corpus(spec);
    const auto nearest = oracle_nearest_sibling(c.centroids);
    for (const auto& d : c.centroids) {
      // Brute force over centroids for the closest one.
      double best = 1e300;
      std::string arg;
      for (const auto& e : c.centroids) {
        if (e.dialect == d.dialect) continue;
        const double dist = (e.mean - d.mean).norm();
        if (dist < best) {
          best = dist;
          arg = e.dialect;
        }
      }
      CHECK(nearest.at(d.dialect) == arg);
      if (c.manifest.dialects().size() > 1 && d.language != "Naxi" && d.language != "Laze") {
        CHECK(c.manifest.language_of(arg) == d.language);
      }
    }
  }
}

TEST_CASE("spec validation names the field") {
  const auto message = [](SynthSpec s) {
    try {
      validate(s);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  auto s = small_spec();
  s.within_dialect_noise = -1.0;
  CHECK(message(s).find("within_dialect_noise") != std::string::npos);
  s = small_spec();
  s.files_per_dialect = 1;
  CHECK(message(s).find("files_per_dialect") != std::string::npos);
  s = small_spec();
  s.frames_per_file = 234;
  CHECK(message(s).find("frames_per_file") != std::string::npos);
  s = small_spec();
  s.languages[1].dialects.push_back("a1");
  CHECK(message(s).find("languages") != std::string::npos);
  CHECK(message(small_spec()).empty());
}

TEST_CASE("spec JSON") {
  const auto s = parse_synth_spec(R"({"dim": 4, "seed": 9,
      "languages": [{"name": "A", "dialects": ["a", "b"]}]})");
  CHECK(s.dim == 4);
  CHECK(s.seed == 9);
  CHECK(s.languages.size() == 1);
  CHECK(s.files_per_dialect == SynthSpec{}.files_per_dialect);

  const auto back = parse_synth_spec(synth_spec_to_json(small_spec()));
  CHECK(synth_spec_to_json(back) == synth_spec_to_json(small_spec()));

  CHECK_THROWS_AS(parse_synth_spec(R"({"dim": "four"})"), ParseError);
  CHECK_THROWS_AS(parse_synth_spec(R"({"within_dialect_noise": -0.1})"), ValidationError);
  CHECK_THROWS_AS(parse_synth_spec("nope"), ParseError);
}

TEST_CASE("write_corpus produces a loadable corpus") {
  TempDir dir("synth");
  const auto c = generate_corpus(small_spec());
  write_corpus(c, dir.path());
  const auto manifest = corpus::load_manifest(dir / "manifest.json");
  const auto loaded = corpus::load_corpus(manifest);
  REQUIRE(loaded.size() == c.matrices.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].frames == c.matrices[i].frames);
    CHECK(loaded[i].dialect == c.matrices[i].dialect);
  }
}

TEST_CASE("more frame noise does not raise dialect-ID F1") {
  SynthSpec spec;
  spec.dim = 16;
  spec.language_centroid_scale = 2.0;
  spec.dialect_offset_scale = 1.0;
  spec.files_per_dialect = 3;
  spec.frames_per_file = 4 * 235;
  spec.seed = 5;
  protocols::ProtocolConfig cfg;
  cfg.seed = 5;
  std::vector<double> f1;
  for (double noise : {1.0, 4.0, 16.0}) {
    spec.within_dialect_noise = noise;
    const auto ds = snippets::build_dataset(generate_corpus(spec).matrices, Pooling::kMean);
    f1.push_back(protocols::run_identification(ds, protocols::LabelLevel::kDialect, cfg)
                     .eval().macro.f1);
  }
  MESSAGE("noise sweep F1: " << f1[0] << " " << f1[1] << " " << f1[2]);
  CHECK(f1[1] <= f1[0] + 0.05);
  CHECK(f1[2] <= f1[1] + 0.05);
}
