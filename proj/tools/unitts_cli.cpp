// Copyright 2026 The unitts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "unitts/common.hpp"
#include "unitts/pipeline.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitArtifact = 3;
constexpr int kExitNumerical = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unitts: multilingual text-to-speech through discrete sound units"};
  app.require_subcommand(1);

  std::string config_path;
  std::string workdir;
  bool force = false;
  app.add_option("-c,--config", config_path, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("-w,--workdir", workdir, "override the config's workdir");
  app.add_flag("-f,--force", force, "re-run even when artifacts are up to date");

  std::vector<CLI::App*> simple;
  for (const char* name : {"gen-corpus", "build-vocab", "train-codebook", "encode-units", "align", "train-vocoder",
                           "eval"}) {
    simple.push_back(app.add_subcommand(name));
  }
  simple[0]->description("generate the seeded synthetic corpus");
  simple[1]->description("build the shared token vocabulary");
  simple[2]->description("fit the unit codebook on all audio");
  simple[3]->description("quantize every utterance to units");
  simple[4]->description("force-align tokens to units for duration targets");
  simple[5]->description("train the unit-to-waveform vocoder");
  simple[6]->description("write the objective evaluation report");

  auto* t2u = app.add_subcommand("train-t2u", "train the text-to-unit model");
  std::optional<int> max_paired;
  t2u->add_option("--max-paired-per-language", max_paired, "paired frames kept per language");

  auto* synth = app.add_subcommand("synthesize", "text to waveform");
  std::string text, language, speaker, out;
  synth->add_option("--text", text)->required();
  synth->add_option("--language", language)->required();
  synth->add_option("--speaker", speaker)->required();
  synth->add_option("--out", out)->required();

  auto* xling = app.add_subcommand("cross-lingual", "synthesize one language's text with other speakers");
  std::string text_lang;
  std::vector<std::string> speakers, texts;
  xling->add_option("--text-lang", text_lang)->required();
  xling->add_option("--speaker", speakers)->required();
  xling->add_option("--text", texts, "texts to use (default: held-out texts of --text-lang)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    unitts::pipeline::PipelineConfig config = unitts::pipeline::load_config(config_path);
    if (!workdir.empty()) {
      config.workdir = workdir;
      config.base_dir = std::filesystem::current_path();
    }
    unitts::pipeline::Workspace ws(config);
    unitts::pipeline::RunOptions opts{force, &std::cout};

    if (simple[0]->parsed()) ws.gen_corpus(opts);
    if (simple[1]->parsed()) ws.build_vocab(opts);
    if (simple[2]->parsed()) ws.train_codebook(opts);
    if (simple[3]->parsed()) ws.encode_units(opts);
    if (simple[4]->parsed()) ws.align(opts);
    if (simple[5]->parsed()) ws.train_vocoder(opts);
    if (simple[6]->parsed()) ws.evaluate(opts);
    if (t2u->parsed()) ws.train_t2u(opts, max_paired);
    if (synth->parsed()) {
      const auto r = ws.synthesize(text, language, speaker, out);
      std::cout << "synthesize: " << r.units.size() << " frames, " << r.audio.samples.size() << " samples -> " << out
                << '\n';
    }
    if (xling->parsed()) ws.cross_lingual(text_lang, speakers, texts, opts);
  } catch (const unitts::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const unitts::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArtifact;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArtifact;
  }
  return 0;
}
