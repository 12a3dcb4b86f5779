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

#include "lectometer/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lectometer/corpus.hpp"
#include "lectometer/metrics.hpp"
#include "lectometer/protocols.hpp"
#include "lectometer/snippets.hpp"
#include "lectometer/synth.hpp"

namespace lectometer::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

void report_warnings(const snippets::SnippetDataset& ds, std::ostream& err) {
  for (const auto& w : ds.warnings) {
    err << "warning: file '" << w.file_id << "' has " << w.n_frames
        << " frames, below the kept-window threshold (window " << w.window_frames
        << " frames); it yields no snippets\n";
  }
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int cmd_validate(const fs::path& manifest_path, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const auto manifest = corpus::load_manifest(manifest_path);
    const auto matrices = corpus::load_corpus(manifest);
    for (const auto& m : matrices) corpus::check_frame_matrix(m);
    const auto ds = snippets::build_dataset(matrices, Pooling::kMax);

    struct Row {
      std::string language;
      int files = 0;
      double seconds = 0.0;
      int snippets = 0;
    };
    std::map<std::string, Row> rows;
    for (const auto& m : matrices) {
      auto& r = rows[m.dialect];
      r.language = m.language;
      ++r.files;
      r.seconds += m.duration_seconds();
    }
    for (const auto& l : ds.labels) ++rows[l.dialect].snippets;

    out << "dialect\tlanguage\tfiles\tduration_s\tsnippets\n";
    for (const auto& d : manifest.dialects()) {
      const auto& r = rows[d];
      out << d << '\t' << r.language << '\t' << r.files << '\t'
          << metrics::fixed(r.seconds, 1) << '\t' << r.snippets << '\n';
    }
    out << "total: " << manifest.dialects().size() << " dialects, "
        << manifest.languages().size() << " languages, " << matrices.size()
        << " files, " << ds.size() << " snippets\n";
    report_warnings(ds, err);
    return 0;
  });
}

int cmd_synth(const fs::path& spec_path, const fs::path& out_dir,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto spec = synth::parse_synth_spec(read_file(spec_path));
    const auto corpus = synth::generate_corpus(spec);
    synth::write_corpus(corpus, out_dir);
    out << "wrote " << corpus.matrices.size() << " files and "
        << (out_dir / "manifest.json").string() << '\n';
    return 0;
  });
}

int cmd_run(const fs::path& run_spec_path, const fs::path& manifest_path,
            const fs::path& out_dir, const RunOverrides& overrides,
            std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto config = protocols::parse_run_spec(read_file(run_spec_path));
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.pooling) config.pooling = *overrides.pooling;
    if (overrides.C) {
      if (!(*overrides.C > 0.0)) throw ValidationError("--C must be positive");
      config.C = *overrides.C;
    }

    const auto manifest = corpus::load_manifest(manifest_path);
    const auto matrices = corpus::load_corpus(manifest);
    const auto ds = snippets::build_dataset(
        matrices, config.pooling,
        {config.window_seconds, config.keep_partial_if_at_least});
    report_warnings(ds, err);

    const auto result = protocols::run_protocol(ds, config);

    ensure_dir(out_dir);
    std::string run_id = std::string(protocols::to_string(config.setting)) +
                         "-seed" + std::to_string(config.seed);
    for (int k = 2; fs::exists(out_dir / (run_id + ".record.json")) ||
                    fs::exists(out_dir / (run_id + ".json"));
         ++k) {
      run_id = std::string(protocols::to_string(config.setting)) + "-seed" +
               std::to_string(config.seed) + "-" + std::to_string(k);
    }

    std::vector<std::string> outputs = {run_id + ".tsv", run_id + ".json"};
    write_file(out_dir / outputs[0], protocols::result_to_tsv(result));
    write_file(out_dir / outputs[1], protocols::result_to_json(result));
    if (result.model) {
      outputs.push_back(run_id + ".model.json");
      write_file(out_dir / outputs.back(), model::model_to_json(*result.model));
    }
    for (const auto& f : result.fits) {
      if (!f.converged) {
        err << "warning: fit" << (f.label.empty() ? "" : " '" + f.label + "'")
            << " stopped after " << f.iterations
            << " iterations with gradient norm " << f.grad_inf_norm << '\n';
      }
    }

    json record = {
        {"run_id", run_id},
        {"config", json::parse(protocols::run_spec_to_json(config))},
        {"manifest", fs::absolute(manifest_path).lexically_normal().string()},
        {"outputs", outputs},
        {"tool_version", kVersion},
    };
    write_file(out_dir / (run_id + ".record.json"), record.dump(2) + "\n");
    out << "run " << run_id << ": wrote " << outputs.size() + 1 << " files to "
        << out_dir.string() << '\n';
    return 0;
  });
}

int main(int argc, char** argv) {
  CLI::App app{"Dialect and language identification probes over frozen "
               "speech-embedding frames"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string manifest_path;
  auto* validate = app.add_subcommand("validate", "Check a manifest and its LFM files");
  validate->add_option("manifest", manifest_path, "Corpus manifest (JSON)")->required();

  std::string spec_path, synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth_cmd->add_option("spec", spec_path, "Synthetic corpus spec (JSON)")->required();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  std::string run_spec, run_manifest, run_out, pooling;
  std::uint64_t seed = 0;
  double C = 0.0;
  auto* run = app.add_subcommand("run", "Run one experimental protocol");
  run->add_option("run_spec", run_spec, "Run spec (JSON)")->required();
  run->add_option("--manifest", run_manifest, "Corpus manifest (JSON)")->required();
  run->add_option("--out", run_out, "Output directory")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Run seed (overrides spec)");
  auto* pooling_opt = run->add_option("--pooling", pooling, "max or mean (overrides spec)")
                          ->check(CLI::IsMember({"max", "mean"}));
  auto* c_opt = run->add_option("--C", C, "Inverse regularization strength (overrides spec)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*validate) return cmd_validate(manifest_path, std::cout, std::cerr);
  if (*synth_cmd) return cmd_synth(spec_path, synth_out, std::cout, std::cerr);

  RunOverrides overrides;
  if (*seed_opt) overrides.seed = seed;
  if (*pooling_opt) overrides.pooling = parse_pooling(pooling);
  if (*c_opt) overrides.C = C;
  return cmd_run(run_spec, run_manifest, run_out, overrides, std::cout, std::cerr);
}

}  // namespace lectometer::cli
