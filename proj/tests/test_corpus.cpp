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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "test_util.hpp"
#include "unitts/corpus.hpp"

namespace unitts {
namespace {

using testing::TempDir;

std::string line(const std::string& id, const std::string& speaker = "s") {
  return R"({"id":")" + id + R"(","audio":"wav/)" + id + R"(.wav","text":"ab","language":"L1","speaker":")" +
         speaker + "\"}\n";
}

TEST(Manifest, ReadsRecordsInOrder) {
  const auto utts = parse_manifest(line("c") + line("a") + line("b"));
  ASSERT_EQ(utts.size(), 3u);
  EXPECT_EQ(utts[0].id, "c");
  EXPECT_EQ(utts[1].id, "a");
  EXPECT_EQ(utts[2].id, "b");
  EXPECT_EQ(utts[0].audio_path, "wav/c.wav");
  EXPECT_EQ(utts[0].language, "L1");
}

TEST(Manifest, MissingFieldNamesLine) {
  const std::string bad = R"({"id":"b","audio":"x.wav","text":"ab","language":"L1"})" "\n";
  try {
    parse_manifest(line("a") + bad + line("c"));
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("speaker"), std::string::npos) << e.what();
  }
}

TEST(Manifest, EmptyFileIsEmptyList) {
  TempDir dir("manifest");
  write_text_file(dir.file("m.jsonl"), "");
  EXPECT_TRUE(load_manifest(dir.file("m.jsonl")).empty());
}

TEST(Manifest, DuplicateIdAndUnreadableFile) {
  EXPECT_THROW(parse_manifest(line("a") + line("a")), InvalidInput);
  EXPECT_THROW(load_manifest("/nonexistent/unitts/manifest.jsonl"), InvalidInput);
  EXPECT_THROW(parse_manifest("{not json}\n"), InvalidInput);
}

TEST(Manifest, RoundTripProperty) {
  Rng rng(11);
  const std::vector<std::string> alphabet = {"a", "b", " ", "é", "ж", "\"", "\\", "x"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Utterance> utts;
    const int n = 1 + static_cast<int>(rng.index(6));
    for (int i = 0; i < n; ++i) {
      Utterance u;
      u.id = "u" + std::to_string(trial) + "_" + std::to_string(i);
      u.audio_path = "wav/" + u.id + ".wav";
      for (int k = 0; k < 1 + static_cast<int>(rng.index(8)); ++k) u.text += alphabet[rng.index(alphabet.size())];
      if (u.text.find_first_not_of(' ') == std::string::npos) u.text = "a";
      u.language = rng.index(2) ? "L1" : "L2";
      u.speaker = "spk" + std::to_string(rng.index(3));
      utts.push_back(u);
    }
    TempDir dir("manifest_rt");
    save_manifest(utts, dir.file("m.jsonl"));
    EXPECT_EQ(load_manifest(dir.file("m.jsonl")), utts);
  }
}

TEST(SpeakerTable, SortsAndDeduplicates) {
  std::vector<Utterance> utts(3);
  utts[0].speaker = "b";
  utts[1].speaker = "a";
  utts[2].speaker = "b";
  const SpeakerTable t = build_speaker_table(utts);
  EXPECT_EQ(t.ids(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.index("a"), 0u);
  EXPECT_EQ(t.index("b"), 1u);
  EXPECT_THROW(t.index("c"), InvalidInput);
}

TEST(SpeakerTable, SizesAndErrors) {
  std::vector<Utterance> one(1);
  one[0].speaker = "only";
  EXPECT_EQ(build_speaker_table(one).size(), 1u);

  std::vector<Utterance> many(24);
  for (std::size_t i = 0; i < many.size(); ++i) many[i].speaker = "spk" + std::to_string(i % 12);
  EXPECT_EQ(build_speaker_table(many).size(), 12u);

  EXPECT_THROW(build_speaker_table({}), InvalidInput);
}

TEST(SpeakerTable, JsonRoundTripKeepsOrder) {
  const SpeakerTable t({"z", "a", "m"});
  EXPECT_EQ(t.ids(), (std::vector<std::string>{"a", "m", "z"}));
  EXPECT_EQ(SpeakerTable::from_json(t.to_json()), t);
}

TEST(Wav, SilenceRoundTrip) {
  TempDir dir("wav");
  Waveform w;
  w.samples.assign(16000, 0.0);
  write_wav(w, dir.file("s.wav"));
  const Waveform r = read_wav(dir.file("s.wav"));
  EXPECT_EQ(r.sample_rate, 16000);
  ASSERT_EQ(r.size(), 16000u);
  EXPECT_TRUE(std::all_of(r.samples.begin(), r.samples.end(), [](double s) { return s == 0.0; }));
}

TEST(Wav, QuantizationBound) {
  Waveform w;
  Rng rng(3);
  w.samples = {1.0, -1.0, 0.5, -0.25};
  for (int i = 0; i < 1000; ++i) w.samples.push_back(rng.uniform(-1.0, 1.0));
  const Waveform r = decode_wav(encode_wav(w));
  ASSERT_EQ(r.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_LE(std::abs(r.samples[i] - w.samples[i]), 1.0 / 32767);
  // Full scale is stored as 32767.
  const std::string bytes = encode_wav(w);
  const auto lo = static_cast<unsigned char>(bytes[44]);
  const auto hi = static_cast<unsigned char>(bytes[45]);
  EXPECT_EQ(lo | (hi << 8), 32767);
}

TEST(Wav, RejectsStereoAndNonPcm16) {
  Waveform w;
  w.samples.assign(8, 0.1);
  std::string bytes = encode_wav(w);
  std::string stereo = bytes;
  stereo[22] = 2;  // channel count
  EXPECT_THROW(decode_wav(stereo), InvalidInput);
  std::string eight_bit = bytes;
  eight_bit[34] = 8;  // bits per sample
  EXPECT_THROW(decode_wav(eight_bit), InvalidInput);
  std::string float_fmt = bytes;
  float_fmt[20] = 3;  // IEEE float
  EXPECT_THROW(decode_wav(float_fmt), InvalidInput);
  EXPECT_THROW(decode_wav("RIFF"), InvalidInput);
}

TEST(Wav, RejectsOutOfRangeSamples) {
  Waveform w;
  w.samples = {0.0, 1.5};
  EXPECT_THROW(encode_wav(w), InvalidInput);
}

SyntheticLanguageSpec one_letter_language() {
  SyntheticLanguageSpec lang;
  lang.name = "T";
  lang.grapheme_programs["a"] = {{1, 2}, {2, 1}};
  lang.prototypes[1] = {{500.0, 1500.0}, {0.3, 0.2}};
  lang.prototypes[2] = {{1000.0}, {0.4}};
  return lang;
}

TEST(SyntheticCorpus, GraphemeProgramExample) {
  SyntheticCorpusOptions o;
  o.hop = 64;
  o.texts_per_pair = 1;
  o.min_words = o.max_words = 1;
  o.min_word_length = o.max_word_length = 1;
  SyntheticSpeakerSpec spk;
  spk.id = "s";
  const auto c = generate_synthetic_corpus({one_letter_language()}, {spk}, o);
  ASSERT_EQ(c.utterances.size(), 1u);
  EXPECT_EQ(c.utterances[0].text, "a");
  EXPECT_EQ(c.unit_frames[0], (std::vector<int>{1, 1, 2}));
  EXPECT_EQ(c.durations[0], (std::vector<int>{3}));
  EXPECT_EQ(c.waveforms[0].size(), 3u * 64u);
}

TEST(SyntheticCorpus, NyquistRejected) {
  auto lang = one_letter_language();
  SyntheticSpeakerSpec spk;
  spk.id = "s";
  spk.f0_scale = 6.0;  // 1500 Hz * 6 = 9 kHz
  SyntheticCorpusOptions o;
  o.texts_per_pair = 1;
  o.min_words = o.max_words = 1;
  o.min_word_length = o.max_word_length = 1;
  EXPECT_THROW(generate_synthetic_corpus({lang}, {spk}, o), InvalidInput);
  lang.prototypes[2].frequencies = {8000.0};
  spk.f0_scale = 1.0;
  EXPECT_THROW(lang.validate(16000), InvalidInput);
}

class DefaultCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SyntheticCorpusOptions o;
    o.texts_per_pair = 4;
    o.seed = 5;
    corpus_ = new SyntheticCorpus(generate_synthetic_corpus(default_synthetic_languages(),
                                                             default_synthetic_speakers(), o));
  }
  static void TearDownTestSuite() {
    delete corpus_;
    corpus_ = nullptr;
  }
  static SyntheticCorpus* corpus_;
};
SyntheticCorpus* DefaultCorpus::corpus_ = nullptr;

TEST_F(DefaultCorpus, GroundTruthLengthsAgree) {
  const auto& c = *corpus_;
  ASSERT_FALSE(c.utterances.empty());
  for (std::size_t i = 0; i < c.utterances.size(); ++i) {
    int sum = 0;
    for (int d : c.durations[i]) sum += d;
    EXPECT_EQ(static_cast<std::size_t>(sum), c.unit_frames[i].size());
    EXPECT_EQ(c.waveforms[i].size(), c.unit_frames[i].size() * 64u);
    EXPECT_EQ(c.durations[i].size(), split_codepoints(c.utterances[i].text).size());
    for (double s : c.waveforms[i].samples) ASSERT_LE(std::abs(s), 1.0);
  }
}

TEST_F(DefaultCorpus, SameTextSameUnitsAcrossSpeakers) {
  const auto& c = *corpus_;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < c.utterances.size(); ++i) {
    groups[{c.utterances[i].language, c.utterances[i].text}].push_back(i);
  }
  int multi = 0;
  for (const auto& [key, idx] : groups) {
    if (idx.size() > 1) ++multi;
    for (std::size_t j = 1; j < idx.size(); ++j) {
      EXPECT_EQ(c.unit_frames[idx[j]], c.unit_frames[idx[0]]);
      EXPECT_NE(c.utterances[idx[j]].speaker, c.utterances[idx[0]].speaker);
      EXPECT_NE(c.waveforms[idx[j]].samples, c.waveforms[idx[0]].samples);
    }
  }
  EXPECT_GT(multi, 0);
}

TEST_F(DefaultCorpus, SpeakerLanguageCoverage) {
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& u : corpus_->utterances) pairs.insert({u.speaker, u.language});
  for (const auto& spk : default_synthetic_speakers()) {
    for (const auto& lang : default_synthetic_languages()) {
      EXPECT_EQ(pairs.contains({spk.id, lang.name}), spk.speaks(lang.name)) << spk.id << "/" << lang.name;
    }
  }
  EXPECT_FALSE(pairs.contains({"spk3", "L1"}));
}

TEST(SyntheticCorpus, Deterministic) {
  SyntheticCorpusOptions o;
  o.texts_per_pair = 2;
  o.seed = 9;
  const auto a = generate_synthetic_corpus(default_synthetic_languages(), default_synthetic_speakers(), o);
  const auto b = generate_synthetic_corpus(default_synthetic_languages(), default_synthetic_speakers(), o);
  ASSERT_EQ(a.utterances, b.utterances);
  for (std::size_t i = 0; i < a.waveforms.size(); ++i) EXPECT_EQ(a.waveforms[i].samples, b.waveforms[i].samples);
  o.seed = 10;
  const auto c = generate_synthetic_corpus(default_synthetic_languages(), default_synthetic_speakers(), o);
  EXPECT_NE(a.utterances, c.utterances);
}

TEST(SyntheticCorpus, SharedTextsSplit) {
  SyntheticCorpusOptions o;
  o.texts_per_pair = 5;
  o.shared_texts = 2;
  o.seed = 1;
  const auto c = generate_synthetic_corpus(default_synthetic_languages(), default_synthetic_speakers(), o);
  std::map<std::pair<std::string, std::string>, std::set<std::string>> readers;
  std::map<std::string, std::set<std::string>> voices;
  for (const auto& u : c.utterances) {
    readers[{u.language, u.text}].insert(u.speaker);
    voices[u.language].insert(u.speaker);
  }
  for (const auto& [lang, spk] : voices) {
    int shared = 0, own = 0;
    for (const auto& [key, who] : readers) {
      if (key.first != lang) continue;
      if (who.size() == spk.size()) ++shared;
      if (who.size() == 1) ++own;
    }
    EXPECT_EQ(shared, 2) << lang;
    EXPECT_EQ(own, 3 * static_cast<int>(spk.size())) << lang;
  }
  o.shared_texts = 6;
  EXPECT_THROW(generate_synthetic_corpus(default_synthetic_languages(), default_synthetic_speakers(), o),
               InvalidInput);
}

TEST(SyntheticSpecs, JsonRoundTrip) {
  for (const auto& lang : default_synthetic_languages()) {
    nlohmann::json j = lang;
    const auto back = j.get<SyntheticLanguageSpec>();
    EXPECT_EQ(back.name, lang.name);
    EXPECT_EQ(back.grapheme_programs, lang.grapheme_programs);
    ASSERT_EQ(back.prototypes.size(), lang.prototypes.size());
    for (const auto& [id, p] : lang.prototypes) EXPECT_EQ(back.prototypes.at(id).frequencies, p.frequencies);
  }
  for (const auto& spk : default_synthetic_speakers()) {
    nlohmann::json j = spk;
    const auto back = j.get<SyntheticSpeakerSpec>();
    EXPECT_EQ(back.id, spk.id);
    EXPECT_EQ(back.gain, spk.gain);
    EXPECT_EQ(back.languages, spk.languages);
  }
}

}  // namespace
}  // namespace unitts
