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

#include "unitts/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace unitts {

using nlohmann::json;

void Waveform::validate() const {
  if (sample_rate <= 0) throw InvalidInput("waveform sample rate must be positive");
  for (double s : samples) {
    if (!std::isfinite(s)) throw InvalidInput("waveform contains non-finite samples");
  }
}

// --- manifest ----------------------------------------------------------

std::vector<Utterance> parse_manifest(const std::string& text) {
  std::vector<Utterance> out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto where = "manifest line " + std::to_string(lineno) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InvalidInput(where + "malformed record (" + e.what() + ")");
    }
    if (!j.is_object()) throw InvalidInput(where + "record is not an object");
    auto field = [&](const char* key) {
      if (!j.contains(key)) throw InvalidInput(where + "missing field '" + key + "'");
      if (!j[key].is_string()) throw InvalidInput(where + "field '" + key + "' is not a string");
      auto v = j[key].get<std::string>();
      if (v.empty()) throw InvalidInput(where + "field '" + key + "' is empty");
      return v;
    };
    Utterance u{field("id"), field("audio"), field("text"), field("language"), field("speaker")};
    if (!seen.insert(u.id).second) throw InvalidInput(where + "duplicate id '" + u.id + "'");
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<Utterance> load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read manifest '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::string format_manifest(const std::vector<Utterance>& utterances) {
  std::string out;
  for (const auto& u : utterances) {
    json j;
    j["id"] = u.id;
    j["audio"] = u.audio_path;
    j["text"] = u.text;
    j["language"] = u.language;
    j["speaker"] = u.speaker;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_manifest(const std::vector<Utterance>& utterances, const std::string& path) {
  write_text_file(path, format_manifest(utterances));
}

// --- speakers ----------------------------------------------------------

SpeakerTable::SpeakerTable(std::vector<std::string> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

std::size_t SpeakerTable::index(const std::string& id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) throw InvalidInput("unknown speaker '" + id + "'");
  return static_cast<std::size_t>(it - ids_.begin());
}

bool SpeakerTable::contains(const std::string& id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

json SpeakerTable::to_json() const { return json{{"speakers", ids_}}; }

SpeakerTable SpeakerTable::from_json(const json& j) {
  return SpeakerTable(j.at("speakers").get<std::vector<std::string>>());
}

SpeakerTable build_speaker_table(const std::vector<Utterance>& utterances) {
  if (utterances.empty()) throw InvalidInput("cannot build a speaker table from no utterances");
  std::vector<std::string> ids;
  ids.reserve(utterances.size());
  for (const auto& u : utterances) ids.push_back(u.speaker);
  return SpeakerTable(std::move(ids));
}

// --- WAV ---------------------------------------------------------------

namespace {

void put_u16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& b, std::size_t at) {
  if (at + 4 > b.size()) throw InvalidInput("truncated WAV header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + i])) << (8 * i);
  return v;
}

std::uint16_t get_u16(const std::string& b, std::size_t at) {
  if (at + 2 > b.size()) throw InvalidInput("truncated WAV header");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

}  // namespace

std::string encode_wav(const Waveform& w) {
  w.validate();
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    if (!(std::abs(w.samples[i]) <= 1.0)) {
      throw InvalidInput("sample " + std::to_string(i) + " outside [-1, 1]: " + std::to_string(w.samples[i]));
    }
  }
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::string b;
  b.reserve(44 + data_bytes);
  b += "RIFF";
  put_u32(b, 36 + data_bytes);
  b += "WAVE";
  b += "fmt ";
  put_u32(b, 16);
  put_u16(b, 1);  // PCM
  put_u16(b, 1);  // mono
  put_u32(b, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(b, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(b, 2);
  put_u16(b, 16);
  b += "data";
  put_u32(b, data_bytes);
  for (double s : w.samples) {
    const auto q = static_cast<std::int16_t>(std::lround(s * 32767.0));
    put_u16(b, static_cast<std::uint16_t>(q));
  }
  return b;
}

Waveform decode_wav(const std::string& b) {
  if (b.size() < 12 || b.compare(0, 4, "RIFF") != 0 || b.compare(8, 4, "WAVE") != 0) {
    throw InvalidInput("not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  Waveform w;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const std::string tag = b.substr(at, 4);
    const std::uint32_t size = get_u32(b, at + 4);
    const std::size_t body = at + 8;
    if (tag == "fmt ") {
      const auto format = get_u16(b, body);
      const auto channels = get_u16(b, body + 2);
      const auto bits = get_u16(b, body + 14);
      if (format != 1 || bits != 16) throw InvalidInput("WAV is not 16-bit PCM");
      if (channels != 1) throw InvalidInput("WAV is not mono (" + std::to_string(channels) + " channels)");
      w.sample_rate = static_cast<int>(get_u32(b, body + 4));
      have_fmt = true;
    } else if (tag == "data") {
      if (!have_fmt) throw InvalidInput("WAV data chunk precedes fmt chunk");
      const std::size_t n = std::min<std::size_t>(size, b.size() - body) / 2;
      w.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        w.samples[i] = static_cast<std::int16_t>(get_u16(b, body + 2 * i)) / 32767.0;
      }
      return w;
    }
    at = body + size + (size & 1u);
  }
  throw InvalidInput("WAV has no data chunk");
}

void write_wav(const Waveform& w, const std::string& path) { write_text_file(path, encode_wav(w)); }

Waveform read_wav(const std::string& path) { return decode_wav(read_text_file(path)); }

// --- synthetic corpus --------------------------------------------------

namespace {

double tilt_factor(double freq, double tilt_db_per_octave) {
  return std::pow(10.0, tilt_db_per_octave * std::log2(freq / 1000.0) / 20.0);
}

const std::string kSpace = " ";

}  // namespace

void SyntheticLanguageSpec::validate(int sample_rate) const {
  if (name.empty()) throw InvalidInput("synthetic language needs a name");
  if (grapheme_programs.empty()) throw InvalidInput("language '" + name + "' has no graphemes");
  for (const auto& [g, program] : grapheme_programs) {
    if (split_codepoints(g).size() != 1) {
      throw InvalidInput("language '" + name + "': grapheme '" + g + "' is not a single codepoint");
    }
    if (program.empty()) throw InvalidInput("language '" + name + "': empty program for '" + g + "'");
    for (const auto& step : program) {
      if (step.frames < 1) throw InvalidInput("language '" + name + "': frame count < 1 for '" + g + "'");
      if (!prototypes.contains(step.phone)) {
        throw InvalidInput("language '" + name + "': no prototype for pseudo-phone " + std::to_string(step.phone));
      }
    }
  }
  for (const auto& [id, proto] : prototypes) {
    if (id < 0) throw InvalidInput("pseudo-phone ids must be non-negative");
    if (proto.frequencies.size() != proto.amplitudes.size()) {
      throw InvalidInput("pseudo-phone " + std::to_string(id) + ": frequency/amplitude count mismatch");
    }
    for (double f : proto.frequencies) {
      if (!(f > 0.0) || f >= sample_rate / 2.0) {
        throw InvalidInput("pseudo-phone " + std::to_string(id) + ": frequency " + std::to_string(f) +
                           " Hz outside (0, Nyquist)");
      }
    }
  }
}

bool SyntheticSpeakerSpec::speaks(const std::string& language) const {
  return languages.empty() || std::find(languages.begin(), languages.end(), language) != languages.end();
}

void SyntheticSpeakerSpec::validate(int) const {
  if (id.empty()) throw InvalidInput("synthetic speaker needs an id");
  if (!(f0_scale > 0.0)) throw InvalidInput("speaker '" + id + "': f0_scale must be positive");
  if (!(gain > 0.0)) throw InvalidInput("speaker '" + id + "': gain must be positive");
}

std::vector<ProgramStep> text_to_steps(const std::string& text, const SyntheticLanguageSpec& language) {
  std::vector<ProgramStep> steps;
  for (const auto& cp : split_codepoints(text)) {
    auto it = language.grapheme_programs.find(cp);
    if (it == language.grapheme_programs.end()) {
      throw InvalidInput("language '" + language.name + "' has no program for '" + cp + "'");
    }
    steps.insert(steps.end(), it->second.begin(), it->second.end());
  }
  return steps;
}

Waveform render_steps(const std::vector<ProgramStep>& steps, const SyntheticLanguageSpec& language,
                      const SyntheticSpeakerSpec& speaker, int sample_rate, int hop) {
  std::map<int, std::vector<double>> frame_cache;
  auto frame_for = [&](int phone) -> const std::vector<double>& {
    auto it = frame_cache.find(phone);
    if (it != frame_cache.end()) return it->second;
    const auto& proto = language.prototypes.at(phone);
    std::vector<double> frame(static_cast<std::size_t>(hop), 0.0);
    double bound = 0.0;
    for (std::size_t i = 0; i < proto.frequencies.size(); ++i) {
      const double f = proto.frequencies[i] * speaker.f0_scale;
      if (f >= sample_rate / 2.0) {
        throw InvalidInput("speaker '" + speaker.id + "' scales pseudo-phone " + std::to_string(phone) +
                           " to " + std::to_string(f) + " Hz, at or above Nyquist");
      }
      const double a = speaker.gain * proto.amplitudes[i] * tilt_factor(f, speaker.spectral_tilt);
      bound += std::abs(a);
      for (int n = 0; n < hop; ++n) {
        frame[static_cast<std::size_t>(n)] += a * std::sin(2.0 * std::numbers::pi * f * n / sample_rate);
      }
    }
    if (bound > 1.0) {
      throw InvalidInput("speaker '" + speaker.id + "' drives pseudo-phone " + std::to_string(phone) +
                         " beyond full scale");
    }
    return frame_cache.emplace(phone, std::move(frame)).first->second;
  };

  Waveform w;
  w.sample_rate = sample_rate;
  for (const auto& step : steps) {
    const auto& frame = frame_for(step.phone);
    for (int k = 0; k < step.frames; ++k) w.samples.insert(w.samples.end(), frame.begin(), frame.end());
  }
  return w;
}

namespace {

std::string sample_text(const SyntheticLanguageSpec& lang, const SyntheticCorpusOptions& opt, Rng& rng) {
  std::vector<std::string> letters;
  for (const auto& [g, _] : lang.grapheme_programs) {
    if (g != kSpace) letters.push_back(g);
  }
  const bool multiword = lang.grapheme_programs.contains(kSpace);
  const int words = multiword ? opt.min_words + static_cast<int>(rng.index(opt.max_words - opt.min_words + 1)) : 1;
  std::string text;
  int last_phone = -1;
  for (int w = 0; w < words; ++w) {
    if (w > 0) {
      text += kSpace;
      last_phone = lang.grapheme_programs.at(kSpace).back().phone;
    }
    const int len = opt.min_word_length + static_cast<int>(rng.index(opt.max_word_length - opt.min_word_length + 1));
    for (int k = 0; k < len; ++k) {
      // Adjacent graphemes never share a pseudo-phone at the junction, so
      // every token boundary is acoustically observable.
      std::vector<const std::string*> ok;
      for (const auto& g : letters) {
        if (lang.grapheme_programs.at(g).front().phone != last_phone) ok.push_back(&g);
      }
      if (ok.empty()) throw InvalidInput("language '" + lang.name + "' cannot continue a word");
      const std::string& g = *ok[rng.index(ok.size())];
      text += g;
      last_phone = lang.grapheme_programs.at(g).back().phone;
    }
  }
  return text;
}

std::string pad4(std::size_t i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const std::vector<SyntheticLanguageSpec>& languages,
                                          const std::vector<SyntheticSpeakerSpec>& speakers,
                                          const SyntheticCorpusOptions& options) {
  if (languages.empty()) throw InvalidInput("synthetic corpus needs at least one language");
  if (speakers.empty()) throw InvalidInput("synthetic corpus needs at least one speaker");
  if (options.hop <= 0 || options.sample_rate <= 0) throw InvalidInput("hop and sample rate must be positive");
  if (options.shared_texts > options.texts_per_pair) {
    throw InvalidInput("shared_texts cannot exceed texts_per_pair");
  }
  if (options.texts_per_pair < 0 || options.min_words < 1 || options.max_words < options.min_words ||
      options.min_word_length < 1 || options.max_word_length < options.min_word_length) {
    throw InvalidInput("invalid synthetic text length options");
  }
  // A pseudo-phone id denotes one sound everywhere.
  std::map<int, const PhonePrototype*> shared;
  for (const auto& lang : languages) {
    lang.validate(options.sample_rate);
    for (const auto& [id, proto] : lang.prototypes) {
      auto [it, fresh] = shared.emplace(id, &proto);
      if (!fresh && (it->second->frequencies != proto.frequencies || it->second->amplitudes != proto.amplitudes)) {
        throw InvalidInput("pseudo-phone " + std::to_string(id) + " has conflicting prototypes across languages");
      }
    }
  }
  for (const auto& spk : speakers) {
    spk.validate(options.sample_rate);
    for (const auto& [id, proto] : shared) {
      for (double f : proto->frequencies) {
        if (f * spk.f0_scale >= options.sample_rate / 2.0) {
          throw InvalidInput("speaker '" + spk.id + "' scales pseudo-phone " + std::to_string(id) +
                             " to or above Nyquist");
        }
      }
    }
  }

  SyntheticCorpus corpus;
  for (const auto& lang : languages) {
    Rng rng(mix_seed(options.seed, "texts/" + lang.name));
    std::vector<const SyntheticSpeakerSpec*> voices;
    for (const auto& spk : speakers) {
      if (spk.speaks(lang.name)) voices.push_back(&spk);
    }
    const int shared_count = options.shared_texts < 0 ? options.texts_per_pair : options.shared_texts;
    const int own_count = options.texts_per_pair - shared_count;
    const int needed = shared_count + own_count * static_cast<int>(voices.size());
    std::vector<std::string> texts;
    std::set<std::string> seen;
    for (int t = 0; t < needed; ++t) {
      std::string text;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        text = sample_text(lang, options, rng);
        if (!seen.contains(text)) break;
      }
      seen.insert(text);
      texts.push_back(std::move(text));
    }
    for (std::size_t v = 0; v < voices.size(); ++v) {
      const auto& spk = *voices[v];
      // The shared prefix first, then this speaker's own slice.
      std::vector<std::size_t> picks;
      for (int t = 0; t < shared_count; ++t) picks.push_back(static_cast<std::size_t>(t));
      for (int t = 0; t < own_count; ++t) {
        picks.push_back(static_cast<std::size_t>(shared_count + own_count * static_cast<int>(v) + t));
      }
      for (std::size_t t = 0; t < picks.size(); ++t) {
        Utterance u;
        u.id = lang.name + "_" + spk.id + "_" + pad4(t);
        u.audio_path = "wav/" + u.id + ".wav";
        u.text = texts[picks[t]];
        u.language = lang.name;
        u.speaker = spk.id;

        auto steps = text_to_steps(u.text, lang);
        std::vector<int> frames;
        for (const auto& s : steps) frames.insert(frames.end(), static_cast<std::size_t>(s.frames), s.phone);
        std::vector<int> durations;
        for (const auto& cp : split_codepoints(u.text)) {
          int d = 0;
          for (const auto& s : lang.grapheme_programs.at(cp)) d += s.frames;
          durations.push_back(d);
        }
        corpus.waveforms.push_back(render_steps(steps, lang, spk, options.sample_rate, options.hop));
        corpus.unit_frames.push_back(std::move(frames));
        corpus.durations.push_back(std::move(durations));
        corpus.steps.push_back(std::move(steps));
        corpus.utterances.push_back(std::move(u));
      }
    }
  }
  return corpus;
}

// --- defaults ----------------------------------------------------------

std::map<int, PhonePrototype> default_phone_prototypes() {
  // Line spectra on a 500 Hz grid: every harmonic falls on an even bin of a
  // 64-point frame at 16 kHz, so Hann main lobes of neighbouring lines do
  // not cancel. Eight carrier harmonics act as spectral regions; pseudo-phone
  // p lights the carriers of the p-th codeword of the [8,4,4] Reed-Muller
  // code, so any two phones differ in at least four regions. Phone 0 (empty
  // codeword) is a flat comb used as the word-boundary pause.
  constexpr int kHarmonics = 15;
  constexpr double kSpacing = 500.0;
  const int carriers[8] = {1, 2, 3, 5, 7, 9, 12, 15};
  const unsigned generator[4] = {0xFFu, 0x0Fu, 0x33u, 0x55u};
  std::map<int, PhonePrototype> out;
  for (int p = 0; p < 16; ++p) {
    unsigned code = 0;
    for (int bit = 0; bit < 4; ++bit) {
      if (p & (1 << bit)) code ^= generator[bit];
    }
    PhonePrototype proto;
    for (int k = 1; k <= kHarmonics; ++k) {
      double a = p == 0 ? 1.0 : 0.03;
      for (int r = 0; r < 8; ++r) {
        if ((code & (1u << r)) && carriers[r] == k) a = 1.0;
      }
      proto.frequencies.push_back(k * kSpacing);
      proto.amplitudes.push_back(a);
    }
    double sum = 0.0;
    for (double a : proto.amplitudes) sum += a;
    for (double& a : proto.amplitudes) a *= 0.4 / sum;
    out[p] = std::move(proto);
  }
  return out;
}

std::vector<SyntheticLanguageSpec> default_synthetic_languages() {
  const auto protos = default_phone_prototypes();
  auto single = [](int phone, int frames) { return std::vector<ProgramStep>{{phone, frames}}; };

  SyntheticLanguageSpec l1{"L1", {}, protos};
  const char* l1_letters[] = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"};
  const int l1_frames[] = {2, 3, 4, 2, 3, 5, 2, 3, 4, 2, 3, 4};
  for (int i = 0; i < 12; ++i) l1.grapheme_programs[l1_letters[i]] = single(i + 1, l1_frames[i]);
  l1.grapheme_programs["x"] = single(13, 2);
  l1.grapheme_programs["z"] = single(15, 3);
  l1.grapheme_programs[" "] = single(0, 2);

  // Shares a..f (same sounds) with L1.
  SyntheticLanguageSpec l2{"L2", {}, protos};
  for (int i = 0; i < 6; ++i) l2.grapheme_programs[l1_letters[i]] = l1.grapheme_programs[l1_letters[i]];
  l2.grapheme_programs["é"] = single(7, 4);
  l2.grapheme_programs["è"] = single(8, 2);
  l2.grapheme_programs["ü"] = single(13, 3);
  l2.grapheme_programs["ö"] = single(14, 2);
  l2.grapheme_programs["à"] = single(15, 4);
  l2.grapheme_programs["ç"] = single(9, 3);
  l2.grapheme_programs["ñ"] = single(11, 5);
  l2.grapheme_programs["ß"] = single(12, 2);
  l2.grapheme_programs[" "] = single(0, 2);

  SyntheticLanguageSpec l3{"L3", {}, protos};
  const char* l3_letters[] = {"б", "в", "г", "д", "ж", "з", "и", "к", "л", "м", "н", "п", "р", "с", "т"};
  const int l3_phones[] = {1, 3, 5, 7, 9, 11, 13, 15, 2, 4, 6, 8, 10, 12, 14};
  const int l3_frames[] = {3, 2, 4, 3, 2, 4, 2, 3, 5, 2, 3, 4, 2, 3, 2};
  for (int i = 0; i < 15; ++i) l3.grapheme_programs[l3_letters[i]] = single(l3_phones[i], l3_frames[i]);
  // Same sound as б with a longer duration.
  l3.grapheme_programs["ф"] = single(1, 4);
  l3.grapheme_programs[" "] = single(0, 2);

  return {l1, l2, l3};
}

std::vector<SyntheticSpeakerSpec> default_synthetic_speakers() {
  return {
      {"spk0", 1.00, 0.0, 1.00, {"L1", "L3"}},
      {"spk1", 0.99, -2.0, 0.30, {"L1", "L2"}},
      {"spk2", 1.01, 2.0, 0.09, {"L2", "L3"}},
      {"spk3", 1.00, 0.0, 0.027, {"L2"}},
  };
}

// --- JSON --------------------------------------------------------------

void to_json(json& j, const ProgramStep& s) { j = json::array({s.phone, s.frames}); }

void from_json(const json& j, ProgramStep& s) {
  if (!j.is_array() || j.size() != 2) throw InvalidInput("program step must be [phone, frames]");
  s.phone = j[0].get<int>();
  s.frames = j[1].get<int>();
}

void to_json(json& j, const PhonePrototype& p) {
  j = json{{"frequencies", p.frequencies}, {"amplitudes", p.amplitudes}};
}

void from_json(const json& j, PhonePrototype& p) {
  p.frequencies = j.at("frequencies").get<std::vector<double>>();
  p.amplitudes = j.at("amplitudes").get<std::vector<double>>();
}

void to_json(json& j, const SyntheticLanguageSpec& s) {
  json protos = json::object();
  for (const auto& [id, p] : s.prototypes) protos[std::to_string(id)] = p;
  j = json{{"name", s.name}, {"grapheme_programs", s.grapheme_programs}, {"prototypes", protos}};
}

void from_json(const json& j, SyntheticLanguageSpec& s) {
  s.name = j.at("name").get<std::string>();
  s.grapheme_programs = j.at("grapheme_programs").get<std::map<std::string, std::vector<ProgramStep>>>();
  s.prototypes.clear();
  for (const auto& [key, p] : j.at("prototypes").items()) s.prototypes[std::stoi(key)] = p.get<PhonePrototype>();
}

void to_json(json& j, const SyntheticSpeakerSpec& s) {
  j = json{{"id", s.id},
           {"f0_scale", s.f0_scale},
           {"spectral_tilt", s.spectral_tilt},
           {"gain", s.gain},
           {"languages", s.languages}};
}

void from_json(const json& j, SyntheticSpeakerSpec& s) {
  s.id = j.at("id").get<std::string>();
  s.f0_scale = j.value("f0_scale", 1.0);
  s.spectral_tilt = j.value("spectral_tilt", 0.0);
  s.gain = j.value("gain", 1.0);
  s.languages = j.value("languages", std::vector<std::string>{});
}

}  // namespace unitts
