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

#ifndef A2W_CORPUS_HPP_
#define A2W_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "a2w/tensor.hpp"

namespace a2w {

using Transcript = std::vector<std::string>;

inline constexpr const char* kSosToken = "<s>";
inline constexpr const char* kEosToken = "</s>";
inline constexpr const char* kOovToken = "<unk>";

/// Word inventory with a frequency cutoff. Ids 0, 1 and 2 are reserved for
/// sos, eos and the OOV class; the rest follow descending count, then
/// lexicographic order.
class Vocabulary {
 public:
  static constexpr std::size_t kSos = 0;
  static constexpr std::size_t kEos = 1;
  static constexpr std::size_t kOov = 2;

  /// Keeps words seen at least `min_count` times. A non-zero `max_words`
  /// further truncates to the most frequent regular words.
  static Vocabulary build(std::span<const Transcript> transcripts,
                          std::size_t min_count = 5,
                          std::size_t max_words = 0);

  std::size_t size() const { return words_.size(); }
  bool contains(const std::string& word) const;
  /// OOV id for unknown words.
  std::size_t id(const std::string& word) const;
  const std::string& word(std::size_t id) const;
  std::size_t count(std::size_t id) const { return counts_.at(id); }

  /// Ids of `words` followed by eos.
  std::vector<std::size_t> encode(const Transcript& words) const;
  /// Maps ids back to words, stopping at eos and skipping sos.
  Transcript decode(std::span<const std::size_t> ids) const;

  /// FNV-1a over the ordered word list, as 16 hex digits.
  std::string fingerprint() const;

  void write_tsv(std::ostream& out) const;
  static Vocabulary read_tsv(std::istream& in);

 private:
  void add(const std::string& word, std::size_t count);

  std::vector<std::string> words_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Percentage of tokens in `transcripts` that map to the OOV class.
double oov_rate(const Vocabulary& vocab, std::span<const Transcript> transcripts);

/// Character set: 0 sos, 1 eos, 2 space, then the sorted characters seen.
class CharInventory {
 public:
  static constexpr std::size_t kSos = 0;
  static constexpr std::size_t kEos = 1;
  static constexpr std::size_t kSpace = 2;

  static CharInventory build(std::span<const Transcript> transcripts);

  std::size_t size() const { return symbols_.size(); }
  std::size_t id(char c) const;
  /// Ids of `text` followed by eos.
  std::vector<std::size_t> encode(const std::string& text) const;
  /// One character per id; sos is skipped and decoding stops at eos.
  std::string decode(std::span<const std::size_t> ids) const;
  std::string fingerprint() const;

  void write_tsv(std::ostream& out) const;
  static CharInventory read_tsv(std::istream& in);

 private:
  std::vector<char> symbols_;  // ids 0 and 1 hold placeholders
  std::unordered_map<char, std::size_t> index_;
};

/// Words joined by single spaces.
std::string char_transcript(const Transcript& words);
Transcript split_words(const std::string& text);
std::string join_words(std::span<const std::string> words);

struct Utterance {
  std::string id;
  Tensor features;  // T x D
  Transcript words;
  /// Reference positions of words unseen in acoustic training (OOV split).
  std::vector<std::size_t> oov_positions;
};

struct Corpus {
  std::vector<Utterance> utterances;

  std::vector<Transcript> transcripts() const;
  std::size_t total_frames() const;
};

/// Feature file: "A2WF", u16 version, u32 T, u32 D, then T*D float32, all
/// little endian.
void write_features(const std::filesystem::path& path, const Tensor& features);
Tensor read_features(const std::filesystem::path& path);

/// Writes `dir/manifest.jsonl` and one feature file per utterance under
/// `dir/features/`.
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus);
/// Reads a manifest; feature paths are relative to the manifest directory.
Corpus read_corpus(const std::filesystem::path& manifest);

/// Plain text, one sentence per line, whitespace tokenized.
std::vector<Transcript> read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path,
                std::span<const Transcript> sentences);

struct SynthSpec {
  std::size_t alphabet_size = 12;
  std::size_t frames_per_char = 2;
  std::size_t feature_dim = 16;
  double noise = 0.3;
  std::size_t lexicon_size = 200;
  double zipf_exponent = 1.5;
  std::size_t min_word_len = 2;
  std::size_t max_word_len = 5;
  std::size_t min_utt_words = 2;
  std::size_t max_utt_words = 6;
  std::size_t train_utts = 2000;
  std::size_t valid_utts = 200;
  std::size_t test_utts = 200;
  std::size_t oov_test_utts = 200;
  std::size_t oov_words = 40;
  std::size_t lm_sentences = 20000;
  std::size_t duplicate_cap = 300;
  std::uint64_t seed = 1;

  void validate() const;
  std::string to_json() const;
  static SynthSpec from_json(const std::string& text);
};

struct SynthData {
  Transcript lexicon;    // rank order, most frequent first
  Transcript oov_words;  // never used in train, valid or LM text
  Corpus train, valid, test, test_oov;
  std::vector<Transcript> lm_text;
};

/// Each character renders as its one-hot template repeated frames_per_char
/// times plus Gaussian noise; words are separated by the space template.
/// Values are rounded to float32 so a disk round trip is lossless.
SynthData synth_generate(const SynthSpec& spec);

/// Feature rendering of one transcript; `rng` drives the noise.
Tensor render_transcript(const Transcript& words, const SynthSpec& spec,
                         std::mt19937_64& rng);

}  // namespace a2w

#endif  // A2W_CORPUS_HPP_
