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

#include "unitts/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>

#include "unitts/aligner.hpp"

namespace unitts::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// --- config ------------------------------------------------------------------

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw InvalidInput("config: '" + where + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw InvalidInput("config: unknown key '" + key + "' in " + where);
    }
  }
}

json synthetic_options_json(const SyntheticCorpusOptions& o) {
  return {{"sample_rate", o.sample_rate},         {"hop", o.hop},
          {"texts_per_pair", o.texts_per_pair},   {"shared_texts", o.shared_texts},
          {"min_words", o.min_words},             {"max_words", o.max_words},
          {"min_word_length", o.min_word_length}, {"max_word_length", o.max_word_length}};
}

SyntheticCorpusOptions synthetic_options_from(const json& j) {
  check_keys(j, "synthetic.options",
             {"sample_rate", "hop", "texts_per_pair", "shared_texts", "min_words", "max_words", "min_word_length",
              "max_word_length"});
  SyntheticCorpusOptions d;
  SyntheticCorpusOptions o;
  o.sample_rate = j.value("sample_rate", d.sample_rate);
  o.hop = j.value("hop", d.hop);
  o.texts_per_pair = j.value("texts_per_pair", d.texts_per_pair);
  o.shared_texts = j.value("shared_texts", d.shared_texts);
  o.min_words = j.value("min_words", d.min_words);
  o.max_words = j.value("max_words", d.max_words);
  o.min_word_length = j.value("min_word_length", d.min_word_length);
  o.max_word_length = j.value("max_word_length", d.max_word_length);
  return o;
}

json t2u_json(const T2UConfig& c) {
  json j = c;
  j.erase("vocab_size");
  j.erase("num_units");
  return j;
}

json vocoder_json(const VocoderConfig& c) {
  json j = c;
  j.erase("num_units");
  j.erase("num_speakers");
  return j;
}

std::string hash_json(const json& j) { return hex64(fnv1a(j.dump())); }

}  // namespace

PipelineConfig parse_config(const json& j, const fs::path& base_dir) {
  try {
    check_keys(j, "config",
               {"seed", "workdir", "manifest", "lexicon", "text_mode", "unk_policy", "synthetic", "features",
                "codebook", "t2u", "t2u_train", "vocoder", "vocoder_train"});
    PipelineConfig c;
    c.base_dir = base_dir;
    if (!j.contains("seed")) throw InvalidInput("config: 'seed' is required");
    c.seed = j.at("seed").get<std::uint64_t>();
    c.workdir = j.value("workdir", c.workdir);
    c.manifest = j.value("manifest", std::string());
    c.lexicon = j.value("lexicon", std::string());
    c.text_mode = parse_text_mode(j.value("text_mode", std::string("character")));
    const std::string policy = j.value("unk_policy", std::string("strict"));
    if (policy == "strict") {
      c.unk_policy = UnkPolicy::kStrict;
    } else if (policy == "lenient") {
      c.unk_policy = UnkPolicy::kLenient;
    } else {
      throw InvalidInput("config: unk_policy must be 'strict' or 'lenient'");
    }

    const json syn = j.value("synthetic", json::object());
    check_keys(syn, "synthetic", {"options", "languages", "speakers"});
    c.synthetic = synthetic_options_from(syn.value("options", json::object()));
    c.synthetic.seed = c.seed;
    c.languages = syn.contains("languages") ? syn.at("languages").get<std::vector<SyntheticLanguageSpec>>()
                                            : default_synthetic_languages();
    c.speakers = syn.contains("speakers") ? syn.at("speakers").get<std::vector<SyntheticSpeakerSpec>>()
                                          : default_synthetic_speakers();

    const json feat = j.value("features", json::object());
    check_keys(feat, "features", {"sample_rate", "hop", "window", "n_bands", "normalize"});
    c.features = feat.get<FeatureConfig>();
    c.features.validate();

    const json cb = j.value("codebook", json::object());
    check_keys(cb, "codebook", {"k", "max_iters", "tol", "restarts"});
    c.k = cb.value("k", c.k);
    c.kmeans.max_iters = cb.value("max_iters", c.kmeans.max_iters);
    c.kmeans.tol = cb.value("tol", c.kmeans.tol);
    c.kmeans.restarts = cb.value("restarts", c.kmeans.restarts);

    const json t2u = j.value("t2u", json::object());
    check_keys(t2u, "t2u",
               {"embed_dim", "encoder_layers", "decoder_layers", "heads", "ffn_dim", "kernel", "dropout",
                "max_duration"});
    c.t2u = t2u.get<T2UConfig>();
    const json tt = j.value("t2u_train", json::object());
    check_keys(tt, "t2u_train",
               {"epochs", "batch_size", "lr", "lambda_dur", "clip_norm", "heldout_texts_per_language"});
    c.t2u_train.epochs = tt.value("epochs", c.t2u_train.epochs);
    c.t2u_train.batch_size = tt.value("batch_size", c.t2u_train.batch_size);
    c.t2u_train.lr = tt.value("lr", c.t2u_train.lr);
    c.t2u_train.lambda_dur = tt.value("lambda_dur", c.t2u_train.lambda_dur);
    c.t2u_train.clip_norm = tt.value("clip_norm", c.t2u_train.clip_norm);
    c.t2u_train.seed = mix_seed(c.seed, "t2u/train");
    c.heldout_texts_per_language = tt.value("heldout_texts_per_language", 0);

    const json voc = j.value("vocoder", json::object());
    check_keys(voc, "vocoder",
               {"embed_dim", "upsample", "channels", "dilations", "resblock_kernel", "io_kernel", "fft_sizes",
                "l1_weight"});
    c.vocoder = voc.get<VocoderConfig>();
    const json vt = j.value("vocoder_train", json::object());
    check_keys(vt, "vocoder_train", {"epochs", "batch_size", "lr", "clip_norm", "segment_frames"});
    c.vocoder_train.epochs = vt.value("epochs", c.vocoder_train.epochs);
    c.vocoder_train.batch_size = vt.value("batch_size", c.vocoder_train.batch_size);
    c.vocoder_train.lr = vt.value("lr", c.vocoder_train.lr);
    c.vocoder_train.clip_norm = vt.value("clip_norm", c.vocoder_train.clip_norm);
    c.vocoder_train.segment_frames = vt.value("segment_frames", c.vocoder_train.segment_frames);
    c.vocoder_train.seed = mix_seed(c.seed, "vocoder/train");

    if (c.k < 2) throw InvalidInput("config: codebook.k must be >= 2");
    if (c.heldout_texts_per_language < 0) throw InvalidInput("config: heldout_texts_per_language must be >= 0");
    if (c.vocoder.hop() != c.features.hop) {
      throw InvalidInput("config: vocoder upsampling product " + std::to_string(c.vocoder.hop()) +
                         " != feature hop " + std::to_string(c.features.hop));
    }
    if (c.manifest.empty() && c.synthetic.sample_rate != c.features.sample_rate) {
      throw InvalidInput("config: synthetic sample rate differs from the feature sample rate");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
}

PipelineConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path + ": " + e.what());
  }
  return parse_config(j, fs::path(path).parent_path());
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["workdir"] = c.workdir;
  if (!c.manifest.empty()) j["manifest"] = c.manifest;
  if (!c.lexicon.empty()) j["lexicon"] = c.lexicon;
  j["text_mode"] = to_string(c.text_mode);
  j["unk_policy"] = c.unk_policy == UnkPolicy::kStrict ? "strict" : "lenient";
  j["synthetic"] = {{"options", synthetic_options_json(c.synthetic)}, {"languages", c.languages}, {"speakers", c.speakers}};
  j["features"] = c.features;
  j["codebook"] = {{"k", c.k}, {"max_iters", c.kmeans.max_iters}, {"tol", c.kmeans.tol}, {"restarts", c.kmeans.restarts}};
  j["t2u"] = t2u_json(c.t2u);
  j["t2u_train"] = {{"epochs", c.t2u_train.epochs},
                    {"batch_size", c.t2u_train.batch_size},
                    {"lr", c.t2u_train.lr},
                    {"lambda_dur", c.t2u_train.lambda_dur},
                    {"clip_norm", c.t2u_train.clip_norm},
                    {"heldout_texts_per_language", c.heldout_texts_per_language}};
  j["vocoder"] = vocoder_json(c.vocoder);
  j["vocoder_train"] = {{"epochs", c.vocoder_train.epochs},
                        {"batch_size", c.vocoder_train.batch_size},
                        {"lr", c.vocoder_train.lr},
                        {"clip_norm", c.vocoder_train.clip_norm},
                        {"segment_frames", c.vocoder_train.segment_frames}};
  return j;
}

// --- helpers -------------------------------------------------------------------

std::string hash_file(const fs::path& p) { return hex64(fnv1a(read_text_file(p.string()))); }

const std::vector<std::string>& command_order() {
  static const std::vector<std::string> order = {"gen-corpus",    "build-vocab", "train-codebook", "encode-units",
                                                 "align",         "train-t2u",   "train-vocoder",  "synthesize",
                                                 "eval",          "cross-lingual"};
  return order;
}

T2USplit split_paired_data(const std::vector<Utterance>& utterances, const std::map<std::string, int>& frames,
                           int heldout_per_language, std::optional<int> max_frames_per_language) {
  std::map<std::string, std::vector<const Utterance*>> per_language;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& u : utterances) {
    if (!frames.contains(u.id)) continue;
    if (!seen.insert({u.language, normalize_text(u.text)}).second) continue;
    per_language[u.language].push_back(&u);
  }
  T2USplit split;
  for (auto& [lang, list] : per_language) {
    const std::size_t held = std::min(list.size(), static_cast<std::size_t>(heldout_per_language));
    const std::size_t train_end = list.size() - held;
    long budget = max_frames_per_language ? *max_frames_per_language : -1;
    for (std::size_t i = 0; i < train_end; ++i) {
      const int f = frames.at(list[i]->id);
      if (budget >= 0) {
        if (f > budget) break;
        budget -= f;
      }
      split.train_ids.push_back(list[i]->id);
    }
    for (std::size_t i = train_end; i < list.size(); ++i) split.heldout_ids.push_back(list[i]->id);
  }
  return split;
}

namespace {

void write_file(const fs::path& p, const std::string& data) {
  fs::create_directories(p.parent_path());
  write_text_file(p.string(), data);
}

std::map<std::string, std::vector<int>> read_id_lists(const fs::path& p, const std::string& key) {
  std::map<std::string, std::vector<int>> out;
  for (auto& [id, v] : parse_id_lists(read_text_file(p.string()), key)) out[id] = std::move(v);
  return out;
}

}  // namespace

// --- workspace -----------------------------------------------------------------

Workspace::Workspace(PipelineConfig config) : config_(std::move(config)) {
  dir_ = fs::path(config_.workdir);
  if (dir_.is_relative()) dir_ = config_.base_dir / dir_;
}

void Workspace::log(const RunOptions& opts, const std::string& msg) const {
  if (opts.log) *opts.log << msg << '\n';
}

fs::path Workspace::manifest_path() const {
  if (config_.manifest.empty()) return dir_ / "corpus" / "manifest.jsonl";
  fs::path p(config_.manifest);
  return p.is_relative() ? config_.base_dir / p : p;
}

fs::path Workspace::corpus_dir() const { return manifest_path().parent_path(); }

json Workspace::stage_config(const std::string& command) const {
  const json full = config_to_json(config_);
  if (command == "gen-corpus") return {{"seed", config_.seed}, {"synthetic", full["synthetic"]}};
  if (command == "build-vocab") {
    json j = {{"text_mode", full["text_mode"]}, {"unk_policy", full["unk_policy"]}};
    if (!config_.lexicon.empty()) j["lexicon"] = hash_file(config_.base_dir / config_.lexicon);
    return j;
  }
  if (command == "train-codebook") {
    return {{"seed", config_.seed}, {"features", full["features"]}, {"codebook", full["codebook"]}};
  }
  if (command == "encode-units" || command == "align" || command == "eval") return {{"features", full["features"]}};
  if (command == "train-t2u") return {{"seed", config_.seed}, {"t2u", full["t2u"]}, {"t2u_train", full["t2u_train"]}};
  if (command == "train-vocoder") {
    return {{"seed", config_.seed}, {"vocoder", full["vocoder"]}, {"vocoder_train", full["vocoder_train"]}};
  }
  return json::object();
}

std::vector<std::string> Workspace::dependencies(const std::string& command) const {
  std::vector<std::string> deps;
  const bool synthetic = config_.manifest.empty();
  auto corpus = [&] {
    if (synthetic) deps.push_back("gen-corpus");
  };
  if (command == "build-vocab" || command == "train-codebook") {
    corpus();
  } else if (command == "encode-units") {
    corpus();
    deps.push_back("train-codebook");
  } else if (command == "align") {
    corpus();
    deps.push_back("build-vocab");
  } else if (command == "train-t2u") {
    corpus();
    deps.insert(deps.end(), {"build-vocab", "train-codebook", "encode-units", "align"});
  } else if (command == "train-vocoder") {
    corpus();
    deps.insert(deps.end(), {"train-codebook", "encode-units"});
  } else if (command == "synthesize") {
    deps.insert(deps.end(), {"build-vocab", "train-codebook", "train-t2u", "train-vocoder"});
  } else if (command == "eval" || command == "cross-lingual") {
    corpus();
    deps.insert(deps.end(),
                {"build-vocab", "train-codebook", "encode-units", "align", "train-t2u", "train-vocoder"});
  }
  return deps;
}

namespace {

json read_stamp(const fs::path& dir, const std::string& command) {
  const fs::path p = dir / "stamps" / (command + ".json");
  if (!fs::exists(p)) return nullptr;
  try {
    return json::parse(read_text_file(p.string()));
  } catch (const json::exception& e) {
    throw ArtifactError("corrupt stamp " + p.string() + ": " + e.what());
  }
}

std::string summary(const json& stamp) { return hash_json(stamp.at("outputs")); }

}  // namespace

json Workspace::check_inputs(const std::string& command) const {
  const auto deps = dependencies(command);
  std::map<std::string, json> stamps;
  for (const auto& d : deps) {
    json s = read_stamp(dir_, d);
    if (s.is_null()) throw ArtifactError(command + ": missing artifacts from " + d + "; run " + d + " first");
    stamps[d] = std::move(s);
  }
  json inputs = json::object();
  if (!config_.manifest.empty()) {
    const fs::path m = manifest_path();
    if (!fs::exists(m)) throw ArtifactError("manifest " + m.string() + " does not exist");
    inputs["manifest"] = hash_file(m);
  }
  for (const auto& d : deps) {
    const json& s = stamps[d];
    if (s.at("config_hash") != hash_json(stage_config(d))) {
      throw ArtifactError(command + ": stale artifacts from " + d +
                          " (config hash mismatch); re-run " + d + " --force");
    }
    for (const auto& [rel, h] : s.at("outputs").items()) {
      const fs::path p = dir_ / rel;
      if (!fs::exists(p) || hash_file(p) != h.get<std::string>()) {
        throw ArtifactError(command + ": artifact " + rel + " was modified or removed; re-run " + d + " --force");
      }
    }
    for (const auto& [name, h] : s.at("inputs").items()) {
      std::string current;
      if (name == "manifest") {
        current = inputs.value("manifest", std::string());
      } else {
        const json up = read_stamp(dir_, name);
        current = up.is_null() ? std::string() : summary(up);
      }
      if (current != h.get<std::string>()) {
        throw ArtifactError(command + ": artifacts from " + d + " were built from an older " + name +
                            " output; re-run " + d + " --force");
      }
    }
    inputs[d] = summary(s);
  }
  return inputs;
}

void Workspace::require(const std::string& command) const {
  json s = read_stamp(dir_, command);
  if (s.is_null()) throw ArtifactError("missing artifacts from " + command + "; run " + command + " first");
  if (s.at("config_hash") != hash_json(stage_config(command))) {
    throw ArtifactError("stale artifacts from " + command + " (config hash mismatch); re-run " + command + " --force");
  }
}

bool Workspace::up_to_date(const std::string& command, const json& inputs, const json& extra) const {
  const json s = read_stamp(dir_, command);
  if (s.is_null()) return false;
  if (s.at("config_hash") != hash_json(stage_config(command)) || s.at("inputs") != inputs ||
      s.value("extra", json::object()) != extra) {
    return false;
  }
  for (const auto& [rel, h] : s.at("outputs").items()) {
    const fs::path p = dir_ / rel;
    if (!fs::exists(p) || hash_file(p) != h.get<std::string>()) return false;
  }
  return true;
}

void Workspace::write_stamp(const std::string& command, const json& inputs, const json& extra,
                            const std::vector<std::string>& outputs) const {
  json s;
  s["command"] = command;
  s["config_hash"] = hash_json(stage_config(command));
  s["seed"] = config_.seed;
  s["inputs"] = inputs;
  s["extra"] = extra;
  s["outputs"] = json::object();
  for (const auto& rel : outputs) s["outputs"][rel] = hash_file(dir_ / rel);
  write_file(dir_ / "stamps" / (command + ".json"), s.dump(2) + "\n");
}

// --- loaders ---------------------------------------------------------------------

std::vector<Utterance> Workspace::utterances() const {
  if (config_.manifest.empty()) require("gen-corpus");
  return load_manifest(manifest_path().string());
}

Waveform Workspace::audio(const Utterance& u) const {
  fs::path p(u.audio_path);
  if (p.is_relative()) p = corpus_dir() / p;
  return read_wav(p.string());
}

std::optional<PhonemeLexicon> Workspace::lexicon() const {
  if (config_.lexicon.empty()) return std::nullopt;
  fs::path p(config_.lexicon);
  if (p.is_relative()) p = config_.base_dir / p;
  return PhonemeLexicon::load(p.string());
}

Vocabulary Workspace::vocabulary() const {
  require("build-vocab");
  return Vocabulary::from_json(json::parse(read_text_file(path("vocab.json").string())));
}

Codebook Workspace::codebook() const {
  require("train-codebook");
  return Codebook::load(path("codebook.ucbk").string());
}

SpeakerTable Workspace::speaker_table() const {
  require("train-vocoder");
  return SpeakerTable::from_json(json::parse(read_text_file(path("speakers.json").string())));
}

T2UModel Workspace::t2u_model() const {
  require("train-t2u");
  return T2UModel::load(path("t2u.ckpt").string());
}

VocoderModel Workspace::vocoder_model() const {
  require("train-vocoder");
  return VocoderModel::load(path("vocoder.ckpt").string());
}

T2USplit Workspace::t2u_split() const {
  require("train-t2u");
  const json h = json::parse(read_text_file(path("t2u_history.json").string()));
  T2USplit s;
  s.train_ids = h.at("split").at("train").get<std::vector<std::string>>();
  s.heldout_ids = h.at("split").at("heldout").get<std::vector<std::string>>();
  return s;
}

namespace {

std::vector<FeatureSequence> extract_all(const Workspace& ws, const std::vector<Utterance>& utts) {
  std::vector<FeatureSequence> out;
  out.reserve(utts.size());
  for (const auto& u : utts) {
    try {
      out.push_back(extract_features(ws.audio(u), ws.config().features));
    } catch (const InvalidInput& e) {
      throw InvalidInput("utterance '" + u.id + "': " + e.what());
    }
  }
  return out;
}

}  // namespace

// --- commands --------------------------------------------------------------------

Outcome Workspace::gen_corpus(const RunOptions& opts) {
  if (!config_.manifest.empty()) {
    throw InvalidInput("config names an external manifest; gen-corpus only builds synthetic corpora");
  }
  const json inputs = check_inputs("gen-corpus");
  if (!opts.force && up_to_date("gen-corpus", inputs, json::object())) {
    log(opts, "gen-corpus: up to date");
    return Outcome::kUpToDate;
  }
  const SyntheticCorpus c = generate_synthetic_corpus(config_.languages, config_.speakers, config_.synthetic);
  const fs::path cdir = dir_ / "corpus";
  fs::remove_all(cdir);
  fs::create_directories(cdir / "wav");
  std::vector<std::string> outputs;
  std::string truth;
  for (std::size_t i = 0; i < c.utterances.size(); ++i) {
    const auto& u = c.utterances[i];
    write_wav(c.waveforms[i], (cdir / u.audio_path).string());
    outputs.push_back("corpus/" + u.audio_path);
    truth += json{{"id", u.id}, {"units", c.unit_frames[i]}, {"durations", c.durations[i]}}.dump() + "\n";
  }
  save_manifest(c.utterances, (cdir / "manifest.jsonl").string());
  write_file(cdir / "truth.jsonl", truth);
  outputs.push_back("corpus/manifest.jsonl");
  outputs.push_back("corpus/truth.jsonl");
  write_stamp("gen-corpus", inputs, json::object(), outputs);
  log(opts, "gen-corpus: " + std::to_string(c.utterances.size()) + " utterances in " + cdir.string());
  return Outcome::kRan;
}

Outcome Workspace::build_vocab(const RunOptions& opts) {
  const json inputs = check_inputs("build-vocab");
  if (!opts.force && up_to_date("build-vocab", inputs, json::object())) {
    log(opts, "build-vocab: up to date");
    return Outcome::kUpToDate;
  }
  const auto utts = utterances();
  const auto lex = lexicon();
  const Vocabulary v = build_vocabulary(utts, config_.text_mode, lex ? &*lex : nullptr, config_.unk_policy);
  write_file(path("vocab.json"), v.to_json().dump(2) + "\n");
  write_stamp("build-vocab", inputs, json::object(), {"vocab.json"});
  log(opts, "build-vocab: " + std::to_string(v.size()) + " ids (" + to_string(v.mode()) + ")");
  return Outcome::kRan;
}

Outcome Workspace::train_codebook(const RunOptions& opts) {
  const json inputs = check_inputs("train-codebook");
  if (!opts.force && up_to_date("train-codebook", inputs, json::object())) {
    log(opts, "train-codebook: up to date");
    return Outcome::kUpToDate;
  }
  const auto utts = utterances();
  const auto feats = extract_all(*this, utts);
  const Codebook cb = unitts::train_codebook(feats, config_.k, mix_seed(config_.seed, "codebook"), config_.kmeans);
  fs::create_directories(dir_);
  cb.save(path("codebook.ucbk").string());
  write_stamp("train-codebook", inputs, json::object(), {"codebook.ucbk"});
  log(opts, "train-codebook: K=" + std::to_string(cb.size()) + " over " + std::to_string(utts.size()) + " utterances");
  return Outcome::kRan;
}

Outcome Workspace::encode_units(const RunOptions& opts) {
  const json inputs = check_inputs("encode-units");
  if (!opts.force && up_to_date("encode-units", inputs, json::object())) {
    log(opts, "encode-units: up to date");
    return Outcome::kUpToDate;
  }
  const auto utts = utterances();
  const Codebook cb = codebook();
  const auto feats = extract_all(*this, utts);
  std::vector<std::pair<std::string, std::vector<int>>> rows;
  for (std::size_t i = 0; i < utts.size(); ++i) rows.emplace_back(utts[i].id, quantize(feats[i], cb).ids);
  write_file(path("units.jsonl"), format_id_lists(rows, "units"));
  write_stamp("encode-units", inputs, json::object(), {"units.jsonl"});
  log(opts, "encode-units: " + std::to_string(rows.size()) + " utterances");
  return Outcome::kRan;
}

Outcome Workspace::align(const RunOptions& opts) {
  const json inputs = check_inputs("align");
  if (!opts.force && up_to_date("align", inputs, json::object())) {
    log(opts, "align: up to date");
    return Outcome::kUpToDate;
  }
  const auto utts = utterances();
  const Vocabulary vocab = vocabulary();
  const auto lex = lexicon();
  std::vector<TokenSequence> tokens;
  for (const auto& u : utts) {
    tokens.push_back(encode(u.text, u.language, vocab, lex ? &*lex : nullptr, config_.unk_policy));
  }
  const auto feats = extract_all(*this, utts);
  const AlignmentBatch batch = align_corpus(utts, feats, tokens);
  std::vector<std::pair<std::string, std::vector<int>>> rows;
  for (const auto& u : utts) {
    auto it = batch.durations.find(u.id);
    if (it != batch.durations.end()) rows.emplace_back(u.id, it->second.frames);
  }
  write_file(path("durations.jsonl"), format_id_lists(rows, "durations"));
  write_file(path("align_skipped.json"), json(batch.skipped).dump(2) + "\n");
  write_stamp("align", inputs, json::object(), {"durations.jsonl", "align_skipped.json"});
  log(opts, "align: " + std::to_string(rows.size()) + " aligned, " + std::to_string(batch.skipped.size()) + " skipped");
  for (const auto& s : batch.skipped) log(opts, "  skipped " + s);
  return Outcome::kRan;
}

Outcome Workspace::train_t2u(const RunOptions& opts, std::optional<int> max_paired_frames_per_language) {
  if (max_paired_frames_per_language && *max_paired_frames_per_language < 1) {
    throw InvalidInput("--max-paired-per-language must be >= 1 frame");
  }
  const json inputs = check_inputs("train-t2u");
  const json extra = max_paired_frames_per_language ? json{{"max_paired_per_language", *max_paired_frames_per_language}}
                                                    : json::object();
  if (!opts.force && up_to_date("train-t2u", inputs, extra)) {
    log(opts, "train-t2u: up to date");
    return Outcome::kUpToDate;
  }
  const auto utts = utterances();
  const Vocabulary vocab = vocabulary();
  const auto lex = lexicon();
  const Codebook cb = codebook();
  const auto units = read_id_lists(path("units.jsonl"), "units");
  const auto durations = read_id_lists(path("durations.jsonl"), "durations");
  std::map<std::string, int> frames;
  for (const auto& [id, d] : durations) {
    if (units.contains(id)) frames[id] = static_cast<int>(units.at(id).size());
  }
  const T2USplit split =
      split_paired_data(utts, frames, config_.heldout_texts_per_language, max_paired_frames_per_language);
  if (split.train_ids.empty()) throw InvalidInput("train-t2u: no paired training data after selection");
  std::map<std::string, const Utterance*> by_id;
  for (const auto& u : utts) by_id[u.id] = &u;
  std::vector<T2UExample> data;
  for (const auto& id : split.train_ids) {
    const Utterance& u = *by_id.at(id);
    T2UExample ex;
    ex.tokens = encode(u.text, u.language, vocab, lex ? &*lex : nullptr, config_.unk_policy);
    ex.durations.frames = durations.at(id);
    ex.units.ids = units.at(id);
    data.push_back(std::move(ex));
  }
  T2UConfig cfg = config_.t2u;
  cfg.vocab_size = vocab.size();
  cfg.num_units = cb.size();
  T2UModel model(cfg, mix_seed(config_.seed, "t2u/init"));
  const TrainingState state = unitts::train(model, data, config_.t2u_train);
  model.save(path("t2u.ckpt").string());
  json hist = json::array();
  for (const auto& e : state.history) hist.push_back({{"total", e.total}, {"ce", e.ce}, {"duration", e.duration}});
  json doc = {{"steps", state.steps},
              {"history", hist},
              {"split", {{"train", split.train_ids}, {"heldout", split.heldout_ids}}}};
  if (max_paired_frames_per_language) doc["max_paired_per_language"] = *max_paired_frames_per_language;
  write_file(path("t2u_history.json"), doc.dump(2) + "\n");
  write_stamp("train-t2u", inputs, extra, {"t2u.ckpt", "t2u_history.json"});
  log(opts, "train-t2u: " + std::to_string(data.size()) + " utterances, " + std::to_string(state.history.size()) +
                " epochs" +
                (state.history.empty() ? std::string()
                                       : ", final loss " + std::to_string(state.history.back().total)));
  return Outcome::kRan;
}

Outcome Workspace::train_vocoder(const RunOptions& opts) {
  const json inputs = check_inputs("train-vocoder");
  if (!opts.force && up_to_date("train-vocoder", inputs, json::object())) {
    log(opts, "train-vocoder: up to date");
    return Outcome::kUpToDate;
  }
  const auto utts = utterances();
  const Codebook cb = codebook();
  const auto units = read_id_lists(path("units.jsonl"), "units");
  const SpeakerTable table = build_speaker_table(utts);
  std::vector<VocoderExample> data;
  for (const auto& u : utts) {
    VocoderExample ex;
    ex.units.ids = units.at(u.id);
    ex.speaker = static_cast<int>(table.index(u.speaker));
    ex.audio = audio(u);
    data.push_back(std::move(ex));
  }
  data = prepare_vocoder_examples(std::move(data), config_.features.hop);
  VocoderConfig cfg = config_.vocoder;
  cfg.num_units = cb.size();
  cfg.num_speakers = static_cast<int>(table.size());
  VocoderModel model(cfg, mix_seed(config_.seed, "vocoder/init"));
  const VocoderTrainingState state = unitts::train_vocoder(model, data, config_.vocoder_train);
  model.save(path("vocoder.ckpt").string());
  write_file(path("speakers.json"), table.to_json().dump(2) + "\n");
  json hist = json::array();
  for (const auto& e : state.history) hist.push_back({{"total", e.total}, {"spectral", e.spectral}, {"l1", e.l1}});
  write_file(path("vocoder_history.json"), json{{"steps", state.steps}, {"history", hist}}.dump(2) + "\n");
  write_stamp("train-vocoder", inputs, json::object(), {"vocoder.ckpt", "speakers.json", "vocoder_history.json"});
  log(opts, "train-vocoder: " + std::to_string(data.size()) + " utterances, " + std::to_string(table.size()) +
                " speakers, " + std::to_string(state.history.size()) + " epochs" +
                (state.history.empty() ? std::string()
                                       : ", spectral loss " + std::to_string(state.history.front().spectral) +
                                             " -> " + std::to_string(state.history.back().spectral)));
  return Outcome::kRan;
}

SynthesisResult Workspace::synthesize(const std::string& text, const std::string& language,
                                      const std::string& speaker, const std::string& out_path) {
  check_inputs("synthesize");
  const Vocabulary vocab = vocabulary();
  const auto lex = lexicon();
  const T2UModel t2u = t2u_model();
  const VocoderModel voc = vocoder_model();
  const SpeakerTable table = speaker_table();
  if (!table.contains(speaker)) throw InvalidInput("unknown speaker '" + speaker + "'");
  SynthesisResult r;
  r.tokens = encode(text, language, vocab, lex ? &*lex : nullptr, config_.unk_policy);
  const T2UPrediction p = predict_units(t2u, r.tokens);
  r.units = p.units;
  r.durations = p.durations;
  r.audio = unitts::synthesize(voc, r.units, static_cast<int>(table.index(speaker)), config_.features.sample_rate);
  if (!out_path.empty()) write_wav(r.audio, out_path);
  return r;
}

EvalReport Workspace::evaluate(const RunOptions& opts) {
  const json inputs = check_inputs("eval");
  const auto utts = utterances();
  const Vocabulary vocab = vocabulary();
  const auto lex = lexicon();
  const Codebook cb = codebook();
  const T2UModel t2u = t2u_model();
  const VocoderModel voc = vocoder_model();
  const SpeakerTable table = speaker_table();
  const T2USplit split = t2u_split();
  const auto units = read_id_lists(path("units.jsonl"), "units");
  const auto durations = read_id_lists(path("durations.jsonl"), "durations");
  std::map<std::string, const Utterance*> by_id;
  for (const auto& u : utts) by_id[u.id] = &u;

  EvalReport report;
  std::set<std::string> languages;
  for (const auto& u : utts) languages.insert(u.language);
  auto per_language = [&](auto&& fn) {
    for (const auto& lang : languages) fn(lang, report.languages[lang]);
    fn(std::string(), report.overall);
  };

  // Ground truth exists only for synthetic corpora.
  const fs::path truth_path = corpus_dir() / "truth.jsonl";
  if (config_.manifest.empty() && fs::exists(truth_path)) {
    const auto truth_units = read_id_lists(truth_path, "units");
    const auto truth_durations = read_id_lists(truth_path, "durations");
    std::vector<UnitSequence> pred, ref;
    std::vector<std::string> langs;
    for (const auto& u : utts) {
      pred.push_back({units.at(u.id)});
      ref.push_back({truth_units.at(u.id)});
      langs.push_back(u.language);
    }
    const int k = std::max(cb.size(), [&] {
      int m = 0;
      for (const auto& r : ref) m = std::max(m, *std::max_element(r.ids.begin(), r.ids.end()) + 1);
      return m;
    }());
    const PermutedAgreement overall = permuted_agreement(pred, ref, k);
    per_language([&](const std::string& lang, EvalMetrics& m) {
      std::size_t same = 0, total = 0;
      std::vector<DurationSequence> dp, dr;
      for (std::size_t i = 0; i < utts.size(); ++i) {
        if (!lang.empty() && langs[i] != lang) continue;
        for (std::size_t t = 0; t < pred[i].size(); ++t) {
          same += overall.permutation[static_cast<std::size_t>(pred[i].ids[t])] == ref[i].ids[t];
        }
        total += pred[i].size();
        auto it = durations.find(utts[i].id);
        if (it != durations.end() && it->second.size() == truth_durations.at(utts[i].id).size()) {
          dp.push_back({it->second});
          dr.push_back({truth_durations.at(utts[i].id)});
        }
      }
      if (total > 0) m.codebook_agreement = static_cast<double>(same) / static_cast<double>(total);
      if (!dp.empty()) m.aligner_mae = duration_mae(dp, dr);
    });
  }

  // Text-to-unit on held-out texts (training texts when nothing is held out).
  const auto& eval_ids = split.heldout_ids.empty() ? split.train_ids : split.heldout_ids;
  std::map<std::string, std::pair<double, std::size_t>> acc_sum;
  std::map<std::string, std::pair<std::vector<DurationSequence>, std::vector<DurationSequence>>> dur_pairs;
  for (const auto& id : eval_ids) {
    const Utterance& u = *by_id.at(id);
    const TokenSequence tokens = encode(u.text, u.language, vocab, lex ? &*lex : nullptr, config_.unk_policy);
    const T2UPrediction p = predict_units(t2u, tokens);
    const double acc = unit_accuracy_truncated(p.units, UnitSequence{units.at(id)});
    for (const std::string& key : {u.language, std::string()}) {
      acc_sum[key].first += acc;
      acc_sum[key].second += 1;
      dur_pairs[key].first.push_back(p.durations);
      dur_pairs[key].second.push_back({durations.at(id)});
    }
  }
  per_language([&](const std::string& lang, EvalMetrics& m) {
    auto it = acc_sum.find(lang);
    if (it == acc_sum.end()) return;
    m.unit_accuracy = it->second.first / static_cast<double>(it->second.second);
    m.duration_mae = duration_mae(dur_pairs[lang].first, dur_pairs[lang].second);
  });

  // Vocoder: resynthesis from ground-truth units with each utterance's own
  // speaker; the probe is fitted on the original recordings.
  std::vector<LabeledWaveform> reference;
  for (const auto& u : utts) reference.push_back({audio(u), u.speaker});
  const SpeakerProbe probe(reference, config_.features);
  std::map<std::string, std::array<double, 3>> voc_sum;  // hits, recovery, count
  for (const auto& u : utts) {
    const UnitSequence src{units.at(u.id)};
    const Waveform w = unitts::synthesize(voc, src, static_cast<int>(table.index(u.speaker)), config_.features.sample_rate);
    const double hit = probe.classify(w) == u.speaker ? 1.0 : 0.0;
    const double rec = round_trip_recovery(w, src, cb, config_.features);
    for (const std::string& key : {u.language, std::string()}) {
      voc_sum[key][0] += hit;
      voc_sum[key][1] += rec;
      voc_sum[key][2] += 1.0;
    }
  }
  per_language([&](const std::string& lang, EvalMetrics& m) {
    auto it = voc_sum.find(lang);
    if (it == voc_sum.end()) return;
    m.speaker_probe = it->second[0] / it->second[2];
    m.round_trip = it->second[1] / it->second[2];
  });

  write_file(path("eval_report.json"), report.to_json().dump(2) + "\n");
  write_file(path("eval_report.txt"), report.to_table());
  write_stamp("eval", inputs, json::object(), {"eval_report.json", "eval_report.txt"});
  log(opts, report.to_table());
  return report;
}

json CrossLingualResult::to_json() const {
  json j = report.to_json();
  for (std::size_t s = 0; s < report.speakers.size(); ++s) {
    json& e = j["speakers"][s];
    e["pairing_in_training_data"] = pairing_seen[s];
    e["same_language"] = same_language[s];
    e["same_language_recovery"] = same_language_recovery[s];
    e["recovery_gap"] = report.speakers[s].recovery - same_language_recovery[s];
  }
  return j;
}

CrossLingualResult Workspace::cross_lingual(const std::string& text_language, const std::vector<std::string>& speakers,
                                            const std::vector<std::string>& texts, const RunOptions& opts) {
  if (speakers.empty()) throw InvalidInput("cross-lingual: at least one --speaker is required");
  const json inputs = check_inputs("cross-lingual");
  const auto utts = utterances();
  const Vocabulary vocab = vocabulary();
  const auto lex = lexicon();
  const Codebook cb = codebook();
  const T2UModel t2u = t2u_model();
  const VocoderModel voc = vocoder_model();
  const SpeakerTable table = speaker_table();
  const T2USplit split = t2u_split();
  for (const auto& s : speakers) {
    if (!table.contains(s)) throw InvalidInput("cross-lingual: unknown speaker '" + s + "'");
  }
  std::map<std::string, const Utterance*> by_id;
  for (const auto& u : utts) by_id[u.id] = &u;

  // Held-out texts of a language, or every distinct text when none are held out.
  auto texts_of = [&](const std::string& lang) {
    std::vector<std::string> out;
    for (const auto& id : split.heldout_ids) {
      if (by_id.at(id)->language == lang) out.push_back(by_id.at(id)->text);
    }
    if (out.empty()) {
      std::set<std::string> seen;
      for (const auto& u : utts) {
        if (u.language == lang && seen.insert(u.text).second) out.push_back(u.text);
      }
    }
    return out;
  };
  auto encode_all = [&](const std::vector<std::string>& list, const std::string& lang) {
    std::vector<TokenSequence> out;
    for (const auto& t : list) out.push_back(encode(t, lang, vocab, lex ? &*lex : nullptr, config_.unk_policy));
    return out;
  };
  const std::vector<std::string> chosen = texts.empty() ? texts_of(text_language) : texts;
  if (chosen.empty()) throw InvalidInput("cross-lingual: no texts for language '" + text_language + "'");

  std::vector<LabeledWaveform> reference;
  for (const auto& u : utts) reference.push_back({audio(u), u.speaker});
  const SpeakerProbe probe(reference, config_.features);
  ModelSet models{&t2u, &voc, &cb, &table, config_.features, config_.features.sample_rate};

  CrossLingualResult result;
  result.report = cross_lingual_report(models, encode_all(chosen, text_language), speakers, probe);
  for (const auto& s : speakers) {
    bool seen = false;
    std::string native;
    for (const auto& u : utts) {
      if (u.speaker != s) continue;
      if (u.language == text_language) seen = true;
      if (native.empty()) native = u.language;
    }
    result.pairing_seen.push_back(seen);
    result.same_language.push_back(native);
    const auto baseline = cross_lingual_report(models, encode_all(texts_of(native), native), {s}, probe);
    result.same_language_recovery.push_back(baseline.speakers.front().recovery);
  }
  json extra = {{"text_language", text_language}, {"speakers", speakers}, {"texts", texts}};
  write_file(path("cross_lingual.json"), result.to_json().dump(2) + "\n");
  write_stamp("cross-lingual", inputs, extra, {"cross_lingual.json"});
  log(opts, result.to_json().dump(2));
  return result;
}

}  // namespace unitts::pipeline
