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

#include "a2w/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <set>
#include <sstream>

#include "a2w/errors.hpp"
#include "json.hpp"

namespace a2w {

using Json = nlohmann::ordered_json;

#define A2W_MODEL_FIELDS(X)                                                 \
  X(input_dim) X(encoder_layers) X(encoder_hidden) X(subsample_layers)      \
  X(char_tap_layer) X(word_vocab) X(char_vocab) X(decoder_hidden)           \
  X(word_embed) X(char_embed) X(attention_dim) X(conv_channels)             \
  X(conv_width) X(word_sos) X(word_eos) X(char_sos) X(char_eos) X(dropout)  \
  X(init_range) X(forget_bias) X(lambda)

#define A2W_LM_FIELDS(X) \
  X(vocab) X(hidden) X(init_range) X(forget_bias) X(dropout) X(sos) X(eos)

namespace {

Json model_json(const ModelConfig& c) {
  Json j;
#define A2W_PUT(name) j[#name] = c.name;
  A2W_MODEL_FIELDS(A2W_PUT)
#undef A2W_PUT
  return j;
}

ModelConfig model_from(const Json& j) {
  ModelConfig c;
  std::set<std::string> known;
#define A2W_GET(name)  \
  known.insert(#name); \
  if (j.contains(#name)) j.at(#name).get_to(c.name);
  A2W_MODEL_FIELDS(A2W_GET)
#undef A2W_GET
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown model key '" + key + "'");
  }
  return c;
}

Json lm_json(const LmConfig& c) {
  Json j;
#define A2W_PUT(name) j[#name] = c.name;
  A2W_LM_FIELDS(A2W_PUT)
#undef A2W_PUT
  return j;
}

LmConfig lm_from(const Json& j) {
  LmConfig c;
#define A2W_GET(name) j.at(#name).get_to(c.name);
  A2W_LM_FIELDS(A2W_GET)
#undef A2W_GET
  return c;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

static_assert(std::endian::native == std::endian::little,
              "parameter blobs are written in host order");

void save_parameters(const std::filesystem::path& dir,
                     const ParameterList& params, Json& header) {
  Json list = Json::array();
  std::ofstream out(dir / "params.bin", std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / "params.bin").string());
  for (const auto& p : params) {
    list.push_back({{"name", p.name}, {"shape", p.tensor->shape()}});
    const auto values = p.tensor->values();
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
  header["parameters"] = std::move(list);
}

void load_parameters(const std::filesystem::path& dir,
                     const ParameterList& params, const Json& header) {
  const auto& list = header.at("parameters");
  if (list.size() != params.size()) {
    throw DataError("checkpoint has " + std::to_string(list.size()) +
                    " parameters, model expects " +
                    std::to_string(params.size()));
  }
  std::ifstream in(dir / "params.bin", std::ios::binary);
  if (!in) throw DataError("cannot open " + (dir / "params.bin").string());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto name = list[k].at("name").get<std::string>();
    const auto shape = list[k].at("shape").get<Shape>();
    if (name != params[k].name || shape != params[k].tensor->shape()) {
      throw DataError("checkpoint parameter " + name + " " +
                      shape_string(shape) + " does not match model parameter " +
                      params[k].name + " " +
                      shape_string(params[k].tensor->shape()));
    }
    auto data = params[k].tensor->data();
    if (!in.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(data.size() * sizeof(double)))) {
      throw DataError("truncated parameter blob in " + dir.string());
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError("trailing bytes in parameter blob in " + dir.string());
  }
}

Json echo_json(const std::string& echo) {
  return echo.empty() ? Json::object() : Json::parse(echo);
}

Json read_header(const std::filesystem::path& dir, const std::string& kind) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("checkpoint directory " + dir.string() + " does not exist");
  }
  Json header;
  try {
    header = Json::parse(read_file(dir / "checkpoint.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad checkpoint header in " + dir.string() + ": " +
                    e.what());
  }
  if (header.value("kind", "") != kind) {
    throw ConfigError(dir.string() + " is not a " + kind + " checkpoint");
  }
  return header;
}

Vocabulary read_vocab(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return Vocabulary::read_tsv(in);
}

}  // namespace

std::string model_config_to_json(const ModelConfig& config) {
  return model_json(config).dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  try {
    return model_from(Json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model config: ") + e.what());
  }
}

void save_acoustic_model(const std::filesystem::path& dir, JointModel& model,
                         const Vocabulary& vocab, const CharInventory& chars,
                         const std::string& config_echo) {
  std::filesystem::create_directories(dir);
  Json header;
  header["kind"] = "acoustic";
  header["model"] = model_json(model.config);
  header["vocab_fingerprint"] = vocab.fingerprint();
  header["char_fingerprint"] = chars.fingerprint();
  header["config"] = echo_json(config_echo);
  save_parameters(dir, model.parameters(), header);
  write_file(dir / "checkpoint.json", header.dump(2) + "\n");
  std::ostringstream v, c;
  vocab.write_tsv(v);
  chars.write_tsv(c);
  write_file(dir / "vocab.tsv", v.str());
  write_file(dir / "chars.tsv", c.str());
}

AcousticCheckpoint load_acoustic_model(const std::filesystem::path& dir) {
  const Json header = read_header(dir, "acoustic");
  AcousticCheckpoint ck;
  ck.vocab = read_vocab(dir / "vocab.tsv");
  {
    std::istringstream in(read_file(dir / "chars.tsv"));
    ck.chars = CharInventory::read_tsv(in);
  }
  if (ck.vocab.fingerprint() != header.at("vocab_fingerprint") ||
      ck.chars.fingerprint() != header.at("char_fingerprint")) {
    throw DataError("vocabulary files in " + dir.string() +
                    " do not match the checkpoint fingerprints");
  }
  ck.model = JointModel::create(model_from(header.at("model")), 0);
  load_parameters(dir, ck.model.parameters(), header);
  ck.config = header.at("config").dump();
  return ck;
}

void save_language_model(const std::filesystem::path& dir, RnnLm& lm,
                         const Vocabulary& vocab,
                         const std::string& config_echo) {
  std::filesystem::create_directories(dir);
  Json header;
  header["kind"] = "language";
  header["model"] = lm_json(lm.config);
  header["vocab_fingerprint"] = vocab.fingerprint();
  header["config"] = echo_json(config_echo);
  save_parameters(dir, lm.parameters(), header);
  write_file(dir / "checkpoint.json", header.dump(2) + "\n");
  std::ostringstream v;
  vocab.write_tsv(v);
  write_file(dir / "vocab.tsv", v.str());
}

LanguageCheckpoint load_language_model(const std::filesystem::path& dir) {
  const Json header = read_header(dir, "language");
  LanguageCheckpoint ck;
  ck.vocab = read_vocab(dir / "vocab.tsv");
  if (ck.vocab.fingerprint() != header.at("vocab_fingerprint")) {
    throw DataError("vocabulary file in " + dir.string() +
                    " does not match the checkpoint fingerprint");
  }
  ck.lm = RnnLm::create(lm_from(header.at("model")), 0);
  load_parameters(dir, ck.lm.parameters(), header);
  ck.config = header.at("config").dump();
  return ck;
}

void require_same_vocabulary(const Vocabulary& acoustic,
                             const Vocabulary& language) {
  if (acoustic.fingerprint() != language.fingerprint()) {
    throw ConfigError("acoustic model vocabulary (fingerprint " +
                      acoustic.fingerprint() + ", " +
                      std::to_string(acoustic.size()) +
                      " words) differs from language model vocabulary "
                      "(fingerprint " +
                      language.fingerprint() + ", " +
                      std::to_string(language.size()) + " words)");
  }
}

}  // namespace a2w
