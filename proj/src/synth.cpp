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

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>

#include "a2w/corpus.hpp"
#include "a2w/errors.hpp"
#include "json.hpp"

namespace a2w {

void SynthSpec::validate() const {
  if (alphabet_size == 0 || alphabet_size > 26) {
    throw ConfigError("alphabet size must lie in [1, 26]");
  }
  // One basis direction per letter plus one for the space.
  if (alphabet_size + 1 > feature_dim) {
    throw ConfigError("alphabet of " + std::to_string(alphabet_size) +
                      " letters plus space needs feature_dim >= " +
                      std::to_string(alphabet_size + 1) + ", got " +
                      std::to_string(feature_dim));
  }
  if (frames_per_char == 0) throw ConfigError("frames_per_char must be positive");
  if (!(noise >= 0.0)) throw ConfigError("noise must be non-negative");
  if (min_word_len == 0 || min_word_len > max_word_len) {
    throw ConfigError("word length range is empty");
  }
  if (min_utt_words == 0 || min_utt_words > max_utt_words) {
    throw ConfigError("utterance length range is empty");
  }
  if (lexicon_size == 0) throw ConfigError("lexicon must not be empty");
  if (oov_test_utts > 0 && oov_words == 0) {
    throw ConfigError("an OOV test split needs at least one OOV word");
  }
  if (duplicate_cap == 0) throw ConfigError("duplicate_cap must be positive");
  double strings = 0.0;
  for (std::size_t n = min_word_len; n <= max_word_len; ++n) {
    strings += std::pow(static_cast<double>(alphabet_size),
                        static_cast<double>(n));
  }
  if (strings < 2.0 * static_cast<double>(lexicon_size + oov_words)) {
    throw ConfigError("alphabet and word lengths allow too few distinct words");
  }
}

#define A2W_SYNTH_FIELDS(X)                                                   \
  X(alphabet_size) X(frames_per_char) X(feature_dim) X(noise)                 \
  X(lexicon_size) X(zipf_exponent) X(min_word_len) X(max_word_len)            \
  X(min_utt_words) X(max_utt_words) X(train_utts) X(valid_utts) X(test_utts)  \
  X(oov_test_utts) X(oov_words) X(lm_sentences) X(duplicate_cap) X(seed)

std::string SynthSpec::to_json() const {
  nlohmann::ordered_json j;
#define A2W_PUT(name) j[#name] = name;
  A2W_SYNTH_FIELDS(A2W_PUT)
#undef A2W_PUT
  return j.dump(2);
}

SynthSpec SynthSpec::from_json(const std::string& text) {
  SynthSpec spec;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ConfigError("synth spec must be a JSON object");
    std::set<std::string> known;
#define A2W_GET(name)                                   \
  known.insert(#name);                                  \
  if (j.contains(#name)) j.at(#name).get_to(spec.name);
    A2W_SYNTH_FIELDS(A2W_GET)
#undef A2W_GET
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw ConfigError("unknown synth spec key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad synth spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

#undef A2W_SYNTH_FIELDS

Tensor render_transcript(const Transcript& words, const SynthSpec& spec,
                         std::mt19937_64& rng) {
  const std::string text = char_transcript(words);
  const std::size_t dim = spec.feature_dim;
  Tensor out({text.size() * spec.frames_per_char, dim});
  std::normal_distribution<double> noise(0.0, spec.noise);
  std::size_t row = 0;
  for (char c : text) {
    // Space uses basis direction 0, letter k direction k + 1.
    std::size_t hot = 0;
    if (c != ' ') {
      const auto k = static_cast<std::size_t>(c - 'a');
      if (c < 'a' || k >= spec.alphabet_size) {
        throw DataError(std::string("character '") + c +
                        "' outside the synthetic alphabet");
      }
      hot = k + 1;
    }
    for (std::size_t r = 0; r < spec.frames_per_char; ++r, ++row) {
      for (std::size_t d = 0; d < dim; ++d) {
        double v = d == hot ? 1.0 : 0.0;
        if (spec.noise > 0.0) v += noise(rng);
        out.at(row, d) = static_cast<float>(v);
      }
    }
  }
  return out;
}

namespace {

class Sampler {
 public:
  Sampler(const SynthSpec& spec, std::mt19937_64& rng)
      : spec_(spec), rng_(rng) {}

  std::string word() {
    std::uniform_int_distribution<std::size_t> len(spec_.min_word_len,
                                                   spec_.max_word_len);
    std::uniform_int_distribution<int> letter(
        0, static_cast<int>(spec_.alphabet_size) - 1);
    std::string w(len(rng_), 'a');
    for (char& c : w) c = static_cast<char>('a' + letter(rng_));
    return w;
  }

  std::size_t utterance_length() {
    return std::uniform_int_distribution<std::size_t>(spec_.min_utt_words,
                                                       spec_.max_utt_words)(rng_);
  }

 private:
  const SynthSpec& spec_;
  std::mt19937_64& rng_;
};

std::string utt_id(const std::string& split, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%06zu", split.c_str(), k);
  return buf;
}

}  // namespace

SynthData synth_generate(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  Sampler sampler(spec, rng);
  SynthData data;

  std::set<std::string> used;
  while (data.lexicon.size() < spec.lexicon_size) {
    std::string w = sampler.word();
    if (used.insert(w).second) data.lexicon.push_back(w);
  }
  while (data.oov_words.size() < spec.oov_words) {
    std::string w = sampler.word();
    if (used.insert(w).second) data.oov_words.push_back(w);
  }

  std::vector<double> weights(spec.lexicon_size);
  for (std::size_t r = 0; r < weights.size(); ++r) {
    weights[r] = std::pow(static_cast<double>(r + 1), -spec.zipf_exponent);
  }
  std::discrete_distribution<std::size_t> zipf(weights.begin(), weights.end());

  std::map<std::string, std::size_t> seen;
  auto sentence = [&] {
    for (std::size_t attempt = 0; attempt < 100000; ++attempt) {
      Transcript t(sampler.utterance_length());
      for (auto& w : t) w = data.lexicon[zipf(rng)];
      auto& n = seen[join_words(t)];
      if (n < spec.duplicate_cap) {
        ++n;
        return t;
      }
    }
    throw ConfigError("duplicate_cap leaves no room for new utterances");
  };
  auto make_split = [&](const std::string& name, std::size_t count,
                        bool inject_oov) {
    Corpus c;
    for (std::size_t k = 0; k < count; ++k) {
      Utterance u;
      u.id = utt_id(name, k);
      u.words = sentence();
      if (inject_oov) {
        std::uniform_int_distribution<std::size_t> pos(0, u.words.size() - 1);
        std::uniform_int_distribution<std::size_t> pick(
            0, data.oov_words.size() - 1);
        const std::size_t p = pos(rng);
        u.words[p] = data.oov_words[pick(rng)];
        u.oov_positions.push_back(p);
      }
      u.features = render_transcript(u.words, spec, rng);
      c.utterances.push_back(std::move(u));
    }
    return c;
  };
  data.train = make_split("train", spec.train_utts, false);
  data.valid = make_split("valid", spec.valid_utts, false);
  data.test = make_split("test", spec.test_utts, false);
  data.test_oov = make_split("testoov", spec.oov_test_utts, true);
  data.lm_text = data.train.transcripts();
  for (std::size_t k = 0; k < spec.lm_sentences; ++k) {
    data.lm_text.push_back(sentence());
  }
  return data;
}

}  // namespace a2w
