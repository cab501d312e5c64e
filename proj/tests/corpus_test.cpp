// Copyright 2026 The a2w Authors.
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

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "a2w/corpus.hpp"
#include "a2w/errors.hpp"

namespace fs = std::filesystem;

namespace a2w {
namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("a2w_corpus_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<Transcript> counted(const std::map<std::string, int>& counts) {
  std::vector<Transcript> out(1);
  for (const auto& [w, n] : counts) {
    for (int i = 0; i < n; ++i) out[0].push_back(w);
  }
  return out;
}

SynthSpec small_spec() {
  SynthSpec s;
  s.lexicon_size = 30;
  s.oov_words = 5;
  s.train_utts = 100;
  s.valid_utts = 10;
  s.test_utts = 20;
  s.oov_test_utts = 20;
  s.lm_sentences = 50;
  s.duplicate_cap = 100;
  return s;
}

TEST(Vocabulary, CutoffDropsRareWords) {
  const auto text = counted({{"a", 6}, {"b", 5}, {"c", 4}});
  const Vocabulary v = Vocabulary::build(text, 5);
  EXPECT_EQ(v.size(), 5u);
  EXPECT_EQ(v.word(0), kSosToken);
  EXPECT_EQ(v.word(1), kEosToken);
  EXPECT_EQ(v.word(2), kOovToken);
  EXPECT_EQ(v.id("a"), 3u);
  EXPECT_EQ(v.id("b"), 4u);
  EXPECT_FALSE(v.contains("c"));
  EXPECT_EQ(v.id("c"), Vocabulary::kOov);
}

TEST(Vocabulary, MinCountOneKeepsEverythingAndReservesOov) {
  const auto text = counted({{"a", 6}, {"b", 5}, {"c", 4}});
  const Vocabulary v = Vocabulary::build(text, 1);
  EXPECT_EQ(v.size(), 6u);
  EXPECT_TRUE(v.contains("c"));
  EXPECT_EQ(v.word(Vocabulary::kOov), kOovToken);
}

TEST(Vocabulary, EqualCountsOrderLexicographically) {
  const auto text = counted({{"zz", 3}, {"aa", 3}, {"mm", 7}});
  const Vocabulary v = Vocabulary::build(text, 1);
  EXPECT_EQ(v.word(3), "mm");
  EXPECT_EQ(v.word(4), "aa");
  EXPECT_EQ(v.word(5), "zz");
}

TEST(Vocabulary, MaxWordsKeepsMostFrequent) {
  const auto text = counted({{"a", 9}, {"b", 8}, {"c", 7}, {"d", 6}});
  const Vocabulary v = Vocabulary::build(text, 1, 2);
  EXPECT_EQ(v.size(), 5u);
  EXPECT_TRUE(v.contains("b"));
  EXPECT_FALSE(v.contains("c"));
}

TEST(Vocabulary, RecountOracleOnRandomTranscripts) {
  std::mt19937_64 rng(1);
  std::geometric_distribution<int> word(0.05);
  std::uniform_int_distribution<int> len(1, 8);
  std::vector<Transcript> text(10000);
  std::map<std::string, std::size_t> counts;
  for (auto& t : text) {
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      t.push_back("w" + std::to_string(word(rng)));
      ++counts[t.back()];
    }
  }
  const Vocabulary v = Vocabulary::build(text, 5);
  for (const auto& [w, n] : counts) {
    EXPECT_EQ(v.contains(w), n >= 5) << w;
    if (v.contains(w)) EXPECT_EQ(v.count(v.id(w)), n);
  }
  EXPECT_EQ(v.fingerprint(), Vocabulary::build(text, 5).fingerprint());
}

TEST(Vocabulary, EncodeDecodeReplacesOnlyOovWords) {
  const auto text = counted({{"the", 5}, {"cat", 5}, {"rare", 1}});
  const Vocabulary v = Vocabulary::build(text, 2);
  const Transcript t{"the", "rare", "cat"};
  const auto ids = v.encode(t);
  EXPECT_EQ(ids.back(), Vocabulary::kEos);
  EXPECT_EQ(v.decode(ids), (Transcript{"the", kOovToken, "cat"}));
}

TEST(Vocabulary, DecodeSkipsStartAndStopsAtEnd) {
  const auto text = counted({{"x", 5}});
  const Vocabulary v = Vocabulary::build(text, 1);
  const std::vector<std::size_t> ids{0, 3, 1, 3};
  EXPECT_EQ(v.decode(ids), (Transcript{"x"}));
}

TEST(Vocabulary, TsvRoundTrip) {
  const auto text = counted({{"a", 6}, {"b", 5}, {"c", 4}});
  const Vocabulary v = Vocabulary::build(text, 1);
  std::stringstream ss;
  v.write_tsv(ss);
  const Vocabulary back = Vocabulary::read_tsv(ss);
  EXPECT_EQ(back.fingerprint(), v.fingerprint());
  EXPECT_EQ(back.count(back.id("c")), 4u);
  std::stringstream bad("a\t3\n");
  EXPECT_THROW(Vocabulary::read_tsv(bad), DataError);
}

TEST(Vocabulary, FingerprintTracksContent) {
  const Vocabulary a = Vocabulary::build(counted({{"a", 6}, {"b", 5}}), 1);
  const Vocabulary b = Vocabulary::build(counted({{"a", 6}, {"c", 5}}), 1);
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(a.fingerprint().size(), 16u);
}

TEST(OovRate, AllKnownIsZero) {
  const auto text = counted({{"a", 6}});
  EXPECT_EQ(oov_rate(Vocabulary::build(text, 1), text), 0.0);
}

TEST(OovRate, OneUnknownInFifty) {
  const Vocabulary v = Vocabulary::build(counted({{"a", 6}}), 1);
  std::vector<Transcript> text(1, Transcript(49, "a"));
  text[0].push_back("zzz");
  EXPECT_DOUBLE_EQ(oov_rate(v, text), 2.0);
}

TEST(OovRate, FallsAsVocabularyGrows) {
  const SynthData d = synth_generate(small_spec());
  const auto train = d.train.transcripts();
  const auto test = d.test.transcripts();
  double previous = 101.0;
  for (std::size_t cut : {40u, 20u, 10u, 5u, 2u, 1u}) {
    const Vocabulary v = Vocabulary::build(train, cut);
    std::size_t oov = 0, total = 0;
    for (const auto& t : test) {
      for (const auto& w : t) {
        oov += v.contains(w) ? 0 : 1;
        ++total;
      }
    }
    const double rate = oov_rate(v, test);
    EXPECT_DOUBLE_EQ(rate, 100.0 * oov / total);
    EXPECT_LE(rate, previous);
    previous = rate;
  }
}

TEST(OovRate, EmptyTextIsADataError) {
  const Vocabulary v = Vocabulary::build(counted({{"a", 6}}), 1);
  EXPECT_THROW(oov_rate(v, {}), DataError);
}

TEST(CharInventory, ReservedIdsAndSortedSymbols) {
  const std::vector<Transcript> text{{"cab", "b"}};
  const CharInventory c = CharInventory::build(text);
  EXPECT_EQ(c.size(), 6u);
  EXPECT_EQ(c.id(' '), CharInventory::kSpace);
  EXPECT_EQ(c.id('a'), 3u);
  EXPECT_EQ(c.id('c'), 5u);
  EXPECT_THROW(c.id('z'), DataError);
  const auto ids = c.encode("cab b");
  EXPECT_EQ(ids, (std::vector<std::size_t>{5, 3, 4, 2, 4, 1}));
  EXPECT_EQ(c.decode(ids), "cab b");
  std::stringstream ss;
  c.write_tsv(ss);
  EXPECT_EQ(CharInventory::read_tsv(ss).fingerprint(), c.fingerprint());
}

TEST(Text, CharTranscriptLength) {
  const Transcript t{"ab", "cde", "f"};
  EXPECT_EQ(char_transcript(t), "ab cde f");
  EXPECT_EQ(char_transcript(t).size(), 2u + 3u + 1u + 2u);
  EXPECT_EQ(split_words("  ab  cde f "), t);
  EXPECT_EQ(join_words(t), "ab cde f");
}

TEST(Features, FileRoundTripIsLossless) {
  const fs::path dir = scratch_dir("features");
  std::mt19937_64 rng(2);
  Tensor f = Tensor::uniform({5, 3}, 1.0, rng);
  for (double& v : f.data()) v = static_cast<float>(v);
  write_features(dir / "x.a2wf", f);
  EXPECT_EQ(read_features(dir / "x.a2wf"), f);
  std::ofstream(dir / "bad.a2wf") << "NOPE";
  EXPECT_THROW(read_features(dir / "bad.a2wf"), DataError);
  EXPECT_THROW(read_features(dir / "missing.a2wf"), DataError);
}

TEST(Corpus, DirectoryRoundTrip) {
  const fs::path dir = scratch_dir("corpus");
  const SynthData d = synth_generate(small_spec());
  write_corpus(dir, d.test_oov);
  const Corpus back = read_corpus(dir / "manifest.jsonl");
  ASSERT_EQ(back.utterances.size(), d.test_oov.utterances.size());
  for (std::size_t i = 0; i < back.utterances.size(); ++i) {
    const auto& a = back.utterances[i];
    const auto& b = d.test_oov.utterances[i];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.words, b.words);
    EXPECT_EQ(a.oov_positions, b.oov_positions);
    EXPECT_EQ(a.features, b.features);
  }
  EXPECT_THROW(read_corpus(dir / "nothing.jsonl"), DataError);
}

TEST(Corpus, TextRoundTrip) {
  const fs::path dir = scratch_dir("text");
  const std::vector<Transcript> text{{"a", "b"}, {"c"}};
  write_text(dir / "t.txt", text);
  EXPECT_EQ(read_text(dir / "t.txt"), text);
}

TEST(Synth, NoiselessRenderingIsTemplated) {
  SynthSpec s = small_spec();
  s.noise = 0.0;
  s.frames_per_char = 2;
  std::mt19937_64 rng(1);
  const Tensor f = render_transcript({"ab"}, s, rng);
  ASSERT_EQ(f.shape(), (Shape{4, s.feature_dim}));
  for (std::size_t t = 0; t < 4; ++t) {
    const std::size_t hot = t < 2 ? 1 : 2;
    for (std::size_t d = 0; d < s.feature_dim; ++d) {
      EXPECT_EQ(f.at(t, d), d == hot ? 1.0 : 0.0);
    }
  }
  const Tensor two = render_transcript({"a", "b"}, s, rng);
  ASSERT_EQ(two.rows(), 6u);
  EXPECT_EQ(two.at(2, 0), 1.0);
}

TEST(Synth, SameSeedIsBitwiseIdentical) {
  const SynthData a = synth_generate(small_spec());
  const SynthData b = synth_generate(small_spec());
  ASSERT_EQ(a.train.utterances.size(), b.train.utterances.size());
  for (std::size_t i = 0; i < a.train.utterances.size(); ++i) {
    EXPECT_EQ(a.train.utterances[i].features, b.train.utterances[i].features);
    EXPECT_EQ(a.train.utterances[i].words, b.train.utterances[i].words);
  }
  EXPECT_EQ(a.lm_text, b.lm_text);
  SynthSpec other = small_spec();
  other.seed = 2;
  EXPECT_NE(synth_generate(other).train.transcripts(), a.train.transcripts());
}

TEST(Synth, SplitSizesAndOovPlacement) {
  const SynthSpec s = small_spec();
  const SynthData d = synth_generate(s);
  EXPECT_EQ(d.train.utterances.size(), s.train_utts);
  EXPECT_EQ(d.valid.utterances.size(), s.valid_utts);
  EXPECT_EQ(d.test.utterances.size(), s.test_utts);
  EXPECT_EQ(d.test_oov.utterances.size(), s.oov_test_utts);
  EXPECT_EQ(d.lexicon.size(), s.lexicon_size);
  const std::set<std::string> oov(d.oov_words.begin(), d.oov_words.end());
  for (const auto& t : d.train.transcripts()) {
    for (const auto& w : t) EXPECT_FALSE(oov.count(w)) << w;
  }
  for (const auto& t : d.lm_text) {
    for (const auto& w : t) EXPECT_FALSE(oov.count(w)) << w;
  }
  for (const auto& u : d.test_oov.utterances) {
    ASSERT_EQ(u.oov_positions.size(), 1u);
    EXPECT_TRUE(oov.count(u.words[u.oov_positions[0]]));
    EXPECT_EQ(u.features.rows(),
              char_transcript(u.words).size() * s.frames_per_char);
  }
}

TEST(Synth, TrainOovRateMatchesRecount) {
  const SynthData d = synth_generate(small_spec());
  const auto train = d.train.transcripts();
  const Vocabulary v = Vocabulary::build(train, 5);
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& t : train) {
    for (const auto& w : t) {
      ++counts[w];
      ++total;
    }
  }
  std::size_t rare = 0;
  for (const auto& [w, n] : counts) rare += n < 5 ? n : 0;
  EXPECT_DOUBLE_EQ(oov_rate(v, train), 100.0 * rare / total);
}

TEST(SynthSpec, JsonRoundTripAndValidation) {
  SynthSpec s = small_spec();
  s.noise = 0.125;
  const SynthSpec back = SynthSpec::from_json(s.to_json());
  EXPECT_EQ(back.to_json(), s.to_json());
  EXPECT_THROW(SynthSpec::from_json(R"({"alphabet": 3})"), ConfigError);
  SynthSpec bad = small_spec();
  bad.alphabet_size = 20;  // needs 21 feature dims
  EXPECT_THROW(bad.validate(), ConfigError);
}

}  // namespace
}  // namespace a2w
