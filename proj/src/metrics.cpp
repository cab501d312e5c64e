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

#include "a2w/metrics.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "a2w/errors.hpp"
#include "json.hpp"

namespace a2w {

EditResult edit_distance(std::span<const std::string> ref,
                         std::span<const std::string> hyp) {
  // Cost is (edits, insertions + deletions), compared lexicographically.
  // Among minimum-edit alignments this keeps the most substitutions, which
  // fixes S, I and D uniquely and makes them symmetric under swapping.
  using Cost = std::pair<std::size_t, std::size_t>;
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<Cost> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> Cost& {
    return cost[i * (m + 1) + j];
  };
  auto gap = [](Cost c) { return Cost{c.first + 1, c.second + 1}; };
  auto diag = [&](std::size_t i, std::size_t j) {
    Cost c = at(i - 1, j - 1);
    if (ref[i - 1] != hyp[j - 1]) ++c.first;
    return c;
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = {i, i};
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = {j, j};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      at(i, j) = std::min({diag(i, j), gap(at(i, j - 1)), gap(at(i - 1, j))});
    }
  }
  EditResult r;
  r.distance = at(n, m).first;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == diag(i, j)) {
      const bool same = ref[i - 1] == hyp[j - 1];
      r.alignment.push_back(
          {same ? EditOp::kMatch : EditOp::kSubstitute, i - 1, j - 1});
      if (!same) ++r.substitutions;
      --i;
      --j;
    } else if (j > 0 && at(i, j) == gap(at(i, j - 1))) {
      r.alignment.push_back({EditOp::kInsert, kNoIndex, j - 1});
      ++r.insertions;
      --j;
    } else {
      r.alignment.push_back({EditOp::kDelete, i - 1, kNoIndex});
      ++r.deletions;
      --i;
    }
  }
  std::reverse(r.alignment.begin(), r.alignment.end());
  return r;
}

std::size_t count_detected_oov(std::span<const Transcript> hyps,
                               const std::string& oov_marker) {
  std::size_t n = 0;
  for (const auto& h : hyps) {
    n += static_cast<std::size_t>(std::count(h.begin(), h.end(), oov_marker));
  }
  return n;
}

double frames_to_seconds(std::size_t frames) {
  return static_cast<double>(frames) * kFrameShiftSeconds;
}

double rtf(double wall_seconds, double audio_seconds) {
  if (!(audio_seconds > 0.0)) {
    throw DataError("real-time factor needs a positive audio duration");
  }
  return wall_seconds / audio_seconds;
}

double UtteranceScore::wer() const {
  if (ref_words == 0) return 0.0;
  return 100.0 * static_cast<double>(substitutions + insertions + deletions) /
         static_cast<double>(ref_words);
}

EvalReport evaluate(std::span<const Utterance> refs,
                    std::span<const ScoredHypothesis> hyps,
                    const std::string& system, const std::string& split) {
  std::map<std::string, const ScoredHypothesis*> by_id;
  for (const auto& h : hyps) {
    if (!by_id.emplace(h.id, &h).second) {
      throw DataError("duplicate hypothesis id " + h.id);
    }
  }
  std::map<std::string, const Utterance*> ref_by_id;
  for (const auto& u : refs) {
    if (!ref_by_id.emplace(u.id, &u).second) {
      throw DataError("duplicate reference id " + u.id);
    }
    if (!by_id.count(u.id)) throw DataError("no hypothesis for utterance " + u.id);
  }
  for (const auto& [id, h] : by_id) {
    if (!ref_by_id.count(id)) throw DataError("hypothesis " + id + " has no reference");
  }

  EvalReport report;
  report.system = system;
  report.split = split;
  for (const auto& [id, u] : ref_by_id) {
    const ScoredHypothesis& h = *by_id.at(id);
    const EditResult e = edit_distance(u->words, h.words);
    UtteranceScore s;
    s.id = id;
    s.ref_words = u->words.size();
    s.substitutions = e.substitutions;
    s.insertions = e.insertions;
    s.deletions = e.deletions;
    s.oov_detected = h.oov_detected;
    s.oov_resolved = h.resolved_positions.size();
    s.fallbacks = h.fallbacks;
    s.wall_seconds = h.wall_seconds;
    s.audio_seconds = h.audio_seconds;
    for (const auto& pair : e.alignment) {
      if (pair.op == EditOp::kMatch &&
          std::find(h.resolved_positions.begin(), h.resolved_positions.end(),
                    pair.hyp) != h.resolved_positions.end()) {
        ++s.resolved_correct;
      }
    }
    report.ref_words += s.ref_words;
    report.substitutions += s.substitutions;
    report.insertions += s.insertions;
    report.deletions += s.deletions;
    report.oov_detected += s.oov_detected;
    report.oov_resolved += s.oov_resolved;
    report.resolved_correct += s.resolved_correct;
    report.fallbacks += s.fallbacks;
    report.wall_seconds += s.wall_seconds;
    report.audio_seconds += s.audio_seconds;
    report.utterances.push_back(std::move(s));
  }
  if (report.ref_words > 0) {
    report.wer = 100.0 *
                 static_cast<double>(report.substitutions + report.insertions +
                                     report.deletions) /
                 static_cast<double>(report.ref_words);
  }
  if (report.audio_seconds > 0.0) {
    report.rtf = rtf(report.wall_seconds, report.audio_seconds);
  }
  return report;
}

namespace {

#define A2W_UTT_FIELDS(X)                                                    \
  X(id) X(ref_words) X(substitutions) X(insertions) X(deletions)             \
  X(oov_detected) X(oov_resolved) X(resolved_correct) X(fallbacks)           \
  X(wall_seconds) X(audio_seconds)

#define A2W_REPORT_FIELDS(X)                                                 \
  X(system) X(split) X(ref_words) X(substitutions) X(insertions)             \
  X(deletions) X(wer) X(oov_detected) X(oov_resolved) X(resolved_correct)    \
  X(fallbacks) X(wall_seconds) X(audio_seconds) X(rtf)

}  // namespace

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
#define A2W_PUT(name) j[#name] = name;
  A2W_REPORT_FIELDS(A2W_PUT)
  j["config"] = config.empty() ? nlohmann::ordered_json::object()
                               : nlohmann::ordered_json::parse(config);
  j["utterances"] = nlohmann::ordered_json::array();
  for (const auto& u : utterances) {
    nlohmann::ordered_json row;
#undef A2W_PUT
#define A2W_PUT(name) row[#name] = u.name;
    A2W_UTT_FIELDS(A2W_PUT)
#undef A2W_PUT
    j["utterances"].push_back(std::move(row));
  }
  return j.dump(2);
}

EvalReport EvalReport::from_json(const std::string& text) {
  EvalReport r;
  try {
    const auto j = nlohmann::ordered_json::parse(text);
#define A2W_GET(name) j.at(#name).get_to(r.name);
    A2W_REPORT_FIELDS(A2W_GET)
#undef A2W_GET
    const auto& cfg = j.at("config");
    r.config = cfg.empty() ? std::string() : cfg.dump();
    for (const auto& row : j.at("utterances")) {
      UtteranceScore u;
#define A2W_GET(name) row.at(#name).get_to(u.name);
      A2W_UTT_FIELDS(A2W_GET)
#undef A2W_GET
      r.utterances.push_back(std::move(u));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad evaluation report: ") + e.what());
  }
  return r;
}

#undef A2W_UTT_FIELDS
#undef A2W_REPORT_FIELDS

std::string EvalReport::csv_header() {
  return "system,split,wer,n_oov_detected,n_oov_resolved,n_fallback,rtf";
}

std::string EvalReport::csv_row() const {
  std::ostringstream os;
  os.precision(17);
  os << system << ',' << split << ',' << wer << ',' << oov_detected << ','
     << oov_resolved << ',' << fallbacks << ',' << rtf;
  return os.str();
}

}  // namespace a2w
