#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "z2z/codebook_io.hpp"
#include "z2z/hyper_embedding.hpp"
#include "z2z/metrics.hpp"
#include "z2z/session.hpp"

namespace z2z {

struct MockConfig {
  std::vector<TokenId> prompt;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  std::size_t vocab_size = kByteVocabSize;
  std::size_t dim = 16;
  std::size_t max_merge = 3;
  std::optional<std::size_t> capacity_limit;
};

struct ReuseEvent {
  std::size_t step = 0;
  TokenId code = 0;
  friend bool operator==(const ReuseEvent&, const ReuseEvent&) = default;
};

struct MockResult {
  std::vector<TokenId> prompt_codes;
  std::vector<TokenId> generated_codes;
  BaseSeq flat_output;
  std::vector<ReuseEvent> reuse_events;  // generated steps that chose a hypertoken
  double reuse_rate = 0.0;
  std::vector<CanonicalityViolation> violations;
  std::size_t hyper_embed_calls = 0;
  std::vector<TokenId> cache_keys;
  Codebook codebook{1, 1};
};

/// Drives a Session through the embed / project / sample loop with the
/// transformer body replaced by context-mean pooling: the hidden state is the
/// mean of the vectors of every code in the history (base rows from the
/// table, hypertokens from the cache), and the next code is the greedy argmax
/// of the tied joint logits. Fully deterministic for a given config.
inline MockResult mock_decode_loop(const MockConfig& cfg) {
  const CodebookParams params{cfg.vocab_size, cfg.max_merge, cfg.capacity_limit};
  Session session(params);
  const EmbeddingTable table = EmbeddingTable::hashed(cfg.vocab_size, cfg.dim, cfg.seed);
  HyperEncoder encoder = HyperEncoder::averaging(cfg.max_merge);
  HyperCache cache;

  std::vector<double> context_sum(cfg.dim, 0.0);
  std::size_t context_len = 0;
  auto push_context = [&](TokenId code) {
    std::span<const double> v = session.codebook().is_base(code)
                                    ? table.row(code)
                                    : std::span<const double>(*cache.find(code));
    for (std::size_t j = 0; j < cfg.dim; ++j) context_sum[j] += v[j];
    ++context_len;
  };

  MockResult r;
  r.prompt_codes = session.ingest_prompt(cfg.prompt);
  cache.sync(encoder, table, session.codebook());
  for (TokenId c : r.prompt_codes) push_context(c);

  std::vector<double> hidden(cfg.dim);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (std::size_t j = 0; j < cfg.dim; ++j) {
      hidden[j] = context_len ? context_sum[j] / static_cast<double>(context_len) : 0.0;
    }
    const auto logits = joint_logits(hidden, table, cache, session.codebook());
    const TokenId next = softmax_argmax(logits).argmax;
    const StepInfo info = session.append_generated(next);
    if (info.new_entry) cache.get_or_insert(info.new_entry->id, encoder, table, session.codebook());
    if (!session.codebook().is_base(next)) r.reuse_events.push_back({step, next});
    r.generated_codes.push_back(next);
    push_context(next);
  }

  r.flat_output = session.finalize_output();
  r.reuse_rate = reuse_rate(session.history(), session.codebook());
  r.violations = session.canonicality_report();
  r.hyper_embed_calls = encoder.calls();
  r.cache_keys = cache.keys();
  r.codebook = session.codebook();
  return r;
}

inline nlohmann::json mock_result_to_json(const MockResult& r) {
  nlohmann::json j;
  j["prompt_codes"] = r.prompt_codes;
  j["generated_codes"] = r.generated_codes;
  j["flat_output"] = r.flat_output;
  auto events = nlohmann::json::array();
  for (const auto& e : r.reuse_events) events.push_back({{"step", e.step}, {"code", e.code}});
  j["reuse_events"] = std::move(events);
  j["reuse_rate"] = r.reuse_rate;
  auto viol = nlohmann::json::array();
  for (const auto& v : r.violations) {
    viol.push_back({{"position", v.position}, {"pair", {v.pair.first, v.pair.second}}, {"available_id", v.available_id}});
  }
  j["canonicality_violations"] = std::move(viol);
  j["hyper_embed_calls"] = r.hyper_embed_calls;
  j["codebook"] = codebook_to_json(r.codebook);
  return j;
}

}  // namespace z2z
