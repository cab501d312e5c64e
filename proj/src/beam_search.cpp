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

#include "a2w/beam_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "a2w/errors.hpp"

namespace a2w {

void FusionConfig::validate() const {
  if (beam_size == 0) throw ConfigError("beam size must be at least 1");
  if (!(coverage_threshold >= 0.0)) {
    throw ConfigError("coverage threshold must be non-negative");
  }
  if (!(lm_weight >= 0.0) || !(coverage_weight >= 0.0)) {
    throw ConfigError("fusion weights must be non-negative");
  }
  if (!(max_len_factor > 0.0)) {
    throw ConfigError("max length factor must be positive");
  }
}

int coverage(const AttentionTrace& trace, double threshold) {
  if (trace.rows.empty()) return 0;
  int count = 0;
  for (std::size_t t = 0; t < trace.frames; ++t) {
    double total = 0.0;
    for (const auto& row : trace.rows) total += row[t];
    if (total > threshold) ++count;
  }
  return count;
}

double fused_score(double log_p_am, double log_p_lm, int coverage,
                   const FusionConfig& config, bool with_lm) {
  double total = log_p_am;
  if (with_lm) total += config.lm_weight * log_p_lm;
  total += config.coverage_weight * static_cast<double>(coverage);
  return total;
}

namespace {

struct SearchHyp {
  BeamHypothesis h;
  std::vector<double> cumulative;
  DecoderState decoder;
  std::optional<LmState> lm;
};

struct Candidate {
  std::size_t parent;
  std::size_t token;
  double log_p_am;
  double log_p_lm;
  int coverage;
  double total;
};

// total desc, then shorter, then lexicographically smaller ids.
bool better(const BeamHypothesis& a, const BeamHypothesis& b) {
  if (a.total != b.total) return a.total > b.total;
  if (a.tokens.size() != b.tokens.size()) {
    return a.tokens.size() < b.tokens.size();
  }
  return a.tokens < b.tokens;
}

std::size_t max_steps(std::size_t frames, double factor) {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(factor * static_cast<double>(frames))));
}

}  // namespace

BeamResult beam_search(const AttentionDecoder& decoder, const RnnLm* lm,
                       const Tensor& encoder_out, const FusionConfig& config) {
  config.validate();
  const DecoderConfig& dc = decoder.config;
  if (lm && lm->config.vocab != dc.vocab) {
    throw ConfigError("language model vocabulary size " +
                      std::to_string(lm->config.vocab) +
                      " differs from decoder vocabulary " +
                      std::to_string(dc.vocab));
  }
  const bool with_lm = lm != nullptr;
  Graph g(false);
  EncodedSource source = prepare_source(decoder, g.constant(encoder_out));
  const std::size_t frames = source.frames;
  const std::size_t limit = max_steps(frames, config.max_len_factor);

  std::vector<SearchHyp> live(1);
  live[0].cumulative.assign(frames, 0.0);
  live[0].decoder = initial_decoder_state(decoder, source);
  live[0].h.trace.frames = frames;
  if (with_lm) live[0].lm = lm_zero_state(g, *lm);

  std::vector<BeamHypothesis> finished;
  for (std::size_t step = 0; step < limit && !live.empty(); ++step) {
    std::vector<Candidate> candidates;
    std::vector<DecoderState> next_dec(live.size());
    std::vector<std::optional<LmState>> next_lm(live.size());
    std::vector<std::vector<double>> next_cum(live.size());
    std::vector<Tensor> rows(live.size());
    for (std::size_t i = 0; i < live.size(); ++i) {
      SearchHyp& hyp = live[i];
      const std::size_t prev =
          hyp.h.tokens.empty() ? dc.sos : hyp.h.tokens.back();
      DecodeStep ds = decode_step(decoder, hyp.decoder, prev, source);
      const Tensor am = log_softmax(ds.logits).value();
      Tensor lmp;
      if (with_lm) {
        LmStep ls = lm_step(*lm, prev, *hyp.lm);
        lmp = ls.log_probs.value();
        next_lm[i] = ls.state;
      }
      next_dec[i] = ds.state;
      rows[i] = ds.state.attention.value();
      next_cum[i] = hyp.cumulative;
      int cov = 0;
      for (std::size_t t = 0; t < frames; ++t) {
        next_cum[i][t] += rows[i][t];
        if (next_cum[i][t] > config.coverage_threshold) ++cov;
      }
      for (std::size_t k = 0; k < dc.vocab; ++k) {
        if (k == dc.sos) continue;
        Candidate c;
        c.parent = i;
        c.token = k;
        c.log_p_am = hyp.h.log_p_am + am[k];
        c.log_p_lm = with_lm ? hyp.h.log_p_lm + lmp[k] : 0.0;
        c.coverage = cov;
        c.total = fused_score(c.log_p_am, c.log_p_lm, cov, config, with_lm);
        candidates.push_back(c);
      }
    }
    // All candidates share one length, so ties fall to parent tokens + id.
    std::sort(candidates.begin(), candidates.end(),
              [&](const Candidate& a, const Candidate& b) {
                if (a.total != b.total) return a.total > b.total;
                const auto& ta = live[a.parent].h.tokens;
                const auto& tb = live[b.parent].h.tokens;
                if (ta != tb) return ta < tb;
                return a.token < b.token;
              });
    if (candidates.size() > config.beam_size) {
      candidates.resize(config.beam_size);
    }
    std::vector<SearchHyp> next;
    for (const Candidate& c : candidates) {
      SearchHyp h;
      h.h = live[c.parent].h;
      h.h.tokens.push_back(c.token);
      h.h.log_p_am = c.log_p_am;
      h.h.log_p_lm = c.log_p_lm;
      h.h.coverage = c.coverage;
      h.h.total = c.total;
      h.h.trace.append(rows[c.parent]);
      if (c.token == dc.eos) {
        h.h.finished = true;
        finished.push_back(std::move(h.h));
        continue;
      }
      h.cumulative = next_cum[c.parent];
      h.decoder = next_dec[c.parent];
      h.lm = next_lm[c.parent];
      next.push_back(std::move(h));
    }
    live = std::move(next);

    // Stop once no live hypothesis can still overtake the best finished one:
    // later tokens only add non-positive log-probabilities and coverage can
    // grow by at most the uncovered frames.
    if (!finished.empty() && !live.empty()) {
      double best = finished.front().total;
      for (const auto& f : finished) best = std::max(best, f.total);
      double bound = -std::numeric_limits<double>::infinity();
      for (const auto& h : live) {
        bound = std::max(bound, h.h.total + config.coverage_weight *
                                                static_cast<double>(
                                                    frames - h.h.coverage));
      }
      if (best >= bound) break;
    }
  }

  BeamResult result;
  if (finished.empty()) {
    result.finished = false;
    for (auto& h : live) result.hypotheses.push_back(std::move(h.h));
  } else {
    result.hypotheses = std::move(finished);
  }
  std::sort(result.hypotheses.begin(), result.hypotheses.end(), better);
  return result;
}

GreedyResult greedy_decode(const AttentionDecoder& decoder,
                           const Tensor& encoder_out, std::size_t max_len) {
  const DecoderConfig& dc = decoder.config;
  Graph g(false);
  EncodedSource source = prepare_source(decoder, g.constant(encoder_out));
  DecoderState state = initial_decoder_state(decoder, source);
  GreedyResult out;
  out.trace.frames = source.frames;
  std::size_t prev = dc.sos;
  for (std::size_t step = 0; step < max_len; ++step) {
    DecodeStep ds = decode_step(decoder, state, prev, source);
    const Tensor& logits = ds.logits.value();
    std::size_t best = dc.sos == 0 ? 1 : 0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
      if (k == dc.sos) continue;
      if (logits[k] > logits[best]) best = k;
    }
    out.trace.append(ds.state.attention.value());
    state = ds.state;
    if (best == dc.eos) {
      out.finished = true;
      break;
    }
    out.tokens.push_back(best);
    prev = best;
  }
  return out;
}

ForcedScore teacher_forced_score(const AttentionDecoder& decoder,
                                 const Tensor& encoder_out,
                                 std::span<const std::size_t> tokens) {
  Graph g(false);
  EncodedSource source = prepare_source(decoder, g.constant(encoder_out));
  DecoderState state = initial_decoder_state(decoder, source);
  ForcedScore out;
  out.trace.frames = source.frames;
  std::size_t prev = decoder.config.sos;
  for (std::size_t tok : tokens) {
    DecodeStep ds = decode_step(decoder, state, prev, source);
    out.log_prob += log_softmax(ds.logits).value()[tok];
    out.trace.append(ds.state.attention.value());
    state = ds.state;
    prev = tok;
  }
  return out;
}

}  // namespace a2w
