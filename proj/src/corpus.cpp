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

#include "a2w/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "a2w/errors.hpp"
#include "json.hpp"

namespace a2w {

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

}  // namespace

void Vocabulary::add(const std::string& word, std::size_t count) {
  if (!index_.emplace(word, words_.size()).second) {
    throw DataError("duplicate vocabulary entry '" + word + "'");
  }
  words_.push_back(word);
  counts_.push_back(count);
}

Vocabulary Vocabulary::build(std::span<const Transcript> transcripts,
                             std::size_t min_count, std::size_t max_words) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : transcripts) {
    for (const auto& w : t) ++counts[w];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [w, c] : counts) {
    if (c >= min_count && w != kSosToken && w != kEosToken && w != kOovToken) {
      kept.emplace_back(w, c);
    }
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (max_words > 0 && kept.size() > max_words) kept.resize(max_words);
  Vocabulary v;
  v.add(kSosToken, 0);
  v.add(kEosToken, 0);
  v.add(kOovToken, 0);
  for (const auto& [w, c] : kept) v.add(w, c);
  return v;
}

bool Vocabulary::contains(const std::string& word) const {
  return index_.count(word) > 0;
}

std::size_t Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kOov : it->second;
}

const std::string& Vocabulary::word(std::size_t id) const {
  if (id >= words_.size()) {
    throw DimensionError("word id " + std::to_string(id) +
                         " outside vocabulary of size " +
                         std::to_string(words_.size()));
  }
  return words_[id];
}

std::vector<std::size_t> Vocabulary::encode(const Transcript& words) const {
  std::vector<std::size_t> ids;
  ids.reserve(words.size() + 1);
  for (const auto& w : words) ids.push_back(id(w));
  ids.push_back(kEos);
  return ids;
}

Transcript Vocabulary::decode(std::span<const std::size_t> ids) const {
  Transcript out;
  for (std::size_t id : ids) {
    if (id == kEos) break;
    if (id == kSos) continue;
    out.push_back(word(id));
  }
  return out;
}

std::string Vocabulary::fingerprint() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& w : words_) {
    h = fnv1a(h, w);
    h = fnv1a(h, "\n");
  }
  return hex64(h);
}

void Vocabulary::write_tsv(std::ostream& out) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i] << '\t' << counts_[i] << '\n';
  }
}

Vocabulary Vocabulary::read_tsv(std::istream& in) {
  Vocabulary v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("vocabulary line " + std::to_string(lineno) +
                      " has no tab");
    }
    v.add(line.substr(0, tab), std::stoull(line.substr(tab + 1)));
  }
  if (v.size() < 3 || v.words_[kSos] != kSosToken ||
      v.words_[kEos] != kEosToken || v.words_[kOov] != kOovToken) {
    throw DataError("vocabulary file must start with <s>, </s>, <unk>");
  }
  return v;
}

double oov_rate(const Vocabulary& vocab,
                std::span<const Transcript> transcripts) {
  std::size_t total = 0, oov = 0;
  for (const auto& t : transcripts) {
    for (const auto& w : t) {
      ++total;
      if (vocab.id(w) == Vocabulary::kOov) ++oov;
    }
  }
  if (total == 0) throw DataError("OOV rate of an empty token set is undefined");
  return 100.0 * static_cast<double>(oov) / static_cast<double>(total);
}

CharInventory CharInventory::build(std::span<const Transcript> transcripts) {
  std::vector<char> seen;
  for (const auto& t : transcripts) {
    for (const auto& w : t) {
      for (char c : w) {
        if (c == ' ') throw DataError("word '" + w + "' contains a space");
        seen.push_back(c);
      }
    }
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  CharInventory inv;
  inv.symbols_ = {'\0', '\0', ' '};
  inv.symbols_.insert(inv.symbols_.end(), seen.begin(), seen.end());
  for (std::size_t i = kSpace; i < inv.symbols_.size(); ++i) {
    inv.index_[inv.symbols_[i]] = i;
  }
  return inv;
}

std::size_t CharInventory::id(char c) const {
  auto it = index_.find(c);
  if (it == index_.end()) {
    throw DataError(std::string("character '") + c +
                    "' is not in the character inventory");
  }
  return it->second;
}

std::vector<std::size_t> CharInventory::encode(const std::string& text) const {
  std::vector<std::size_t> ids;
  ids.reserve(text.size() + 1);
  for (char c : text) ids.push_back(id(c));
  ids.push_back(kEos);
  return ids;
}

std::string CharInventory::decode(std::span<const std::size_t> ids) const {
  std::string out;
  for (std::size_t id : ids) {
    if (id == kEos) break;
    if (id == kSos) continue;
    if (id >= symbols_.size()) {
      throw DimensionError("character id " + std::to_string(id) +
                           " outside inventory");
    }
    out.push_back(symbols_[id]);
  }
  return out;
}

std::string CharInventory::fingerprint() const {
  return hex64(fnv1a(kFnvOffset,
                     std::string_view(symbols_.data(), symbols_.size())));
}

void CharInventory::write_tsv(std::ostream& out) const {
  for (std::size_t i = kSpace; i < symbols_.size(); ++i) {
    if (symbols_[i] == ' ') {
      out << "<space>\t" << i << '\n';
    } else {
      out << symbols_[i] << '\t' << i << '\n';
    }
  }
}

CharInventory CharInventory::read_tsv(std::istream& in) {
  CharInventory inv;
  inv.symbols_ = {'\0', '\0'};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const std::string sym = line.substr(0, tab);
    const char c = sym == "<space>" ? ' ' : sym.size() == 1 ? sym[0] : '\0';
    if (c == '\0' || tab == std::string::npos) {
      throw DataError("bad character inventory line '" + line + "'");
    }
    if (std::stoull(line.substr(tab + 1)) != inv.symbols_.size()) {
      throw DataError("character inventory ids must be dense");
    }
    inv.index_[c] = inv.symbols_.size();
    inv.symbols_.push_back(c);
  }
  if (inv.symbols_.size() < 3 || inv.symbols_[kSpace] != ' ') {
    throw DataError("character inventory must start with the space symbol");
  }
  return inv;
}

std::string join_words(std::span<const std::string> words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::string char_transcript(const Transcript& words) {
  return join_words(words);
}

Transcript split_words(const std::string& text) {
  Transcript out;
  std::istringstream is(text);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

std::vector<Transcript> Corpus::transcripts() const {
  std::vector<Transcript> out;
  out.reserve(utterances.size());
  for (const auto& u : utterances) out.push_back(u.words);
  return out;
}

std::size_t Corpus::total_frames() const {
  std::size_t n = 0;
  for (const auto& u : utterances) n += u.features.rows();
  return n;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "feature files are written in host order");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw DataError("truncated feature file " + path.string());
  }
  return v;
}

constexpr std::uint16_t kFeatureVersion = 1;

}  // namespace

void write_features(const std::filesystem::path& path, const Tensor& features) {
  if (features.rank() != 2) {
    throw DimensionError("features must be T x D, got " +
                         shape_string(features.shape()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write("A2WF", 4);
  put<std::uint16_t>(out, kFeatureVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(features.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(features.cols()));
  for (double v : features.values()) put<float>(out, static_cast<float>(v));
}

Tensor read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature file " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "A2WF", 4) != 0) {
    throw DataError(path.string() + " is not an A2WF feature file");
  }
  const auto version = get<std::uint16_t>(in, path);
  if (version != kFeatureVersion) {
    throw DataError("unsupported feature file version " +
                    std::to_string(version) + " in " + path.string());
  }
  const auto frames = get<std::uint32_t>(in, path);
  const auto dim = get<std::uint32_t>(in, path);
  Tensor out({frames, dim});
  for (double& v : out.data()) v = get<float>(in, path);
  return out;
}

void write_corpus(const std::filesystem::path& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir / "features");
  std::ofstream manifest(dir / "manifest.jsonl");
  if (!manifest) throw DataError("cannot write manifest in " + dir.string());
  for (const auto& u : corpus.utterances) {
    const std::string rel = "features/" + u.id + ".a2wf";
    write_features(dir / rel, u.features);
    nlohmann::json j{{"id", u.id}, {"features", rel},
                     {"words", join_words(u.words)}};
    if (!u.oov_positions.empty()) j["oov_positions"] = u.oov_positions;
    manifest << j.dump() << '\n';
  }
}

Corpus read_corpus(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open manifest " + manifest.string());
  const auto base = manifest.parent_path();
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Utterance u;
      u.id = j.at("id").get<std::string>();
      u.features = read_features(base / j.at("features").get<std::string>());
      u.words = split_words(j.at("words").get<std::string>());
      if (j.contains("oov_positions")) {
        u.oov_positions = j["oov_positions"].get<std::vector<std::size_t>>();
      }
      corpus.utterances.push_back(std::move(u));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(manifest.string() + ":" + std::to_string(lineno) + ": " +
                      e.what());
    }
  }
  return corpus;
}

std::vector<Transcript> read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open text file " + path.string());
  std::vector<Transcript> out;
  std::string line;
  while (std::getline(in, line)) {
    Transcript t = split_words(line);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

void write_text(const std::filesystem::path& path,
                std::span<const Transcript> sentences) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& s : sentences) out << join_words(s) << '\n';
}

}  // namespace a2w
