#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "z2z/codebook.hpp"
#include "z2z/error.hpp"
#include "z2z/lzw.hpp"
#include "z2z/types.hpp"

namespace z2z {

struct NewEntry {
  TokenId id = 0;
  BaseSeq tokens;
  friend bool operator==(const NewEntry&, const NewEntry&) = default;
};

struct StepInfo {
  std::optional<NewEntry> new_entry;  // mirror into embedding cache / projection
  BaseSeq flat_tokens;
};

struct CanonicalityViolation {
  std::size_t position = 0;  // index into the generated segment
  std::pair<TokenId, TokenId> pair;
  TokenId available_id = 0;
  friend bool operator==(const CanonicalityViolation&, const CanonicalityViolation&) = default;
};

/// One inference stream: compressed prompt followed by generated codes.
///
/// The codebook is owned by an LzwDecoder driven by the full code history, so
/// the prompt and every generated code grow it through the same
/// prev + first(current) rule. Replaying the history on a fresh session
/// reproduces the state exactly.
class Session {
 public:
  explicit Session(const CodebookParams& params) : dec_(params) {}

  std::vector<TokenId> ingest_prompt(std::span<const TokenId> base_tokens) {
    if (prompt_ingested_ || !generated().empty()) {
      throw Error(ErrorKind::SessionAlreadyStarted, "prompt can only be ingested once, before generation");
    }
    EncodeResult enc = encode_all(dec_.codebook().params(), base_tokens);
    BaseSeq scratch;
    for (TokenId c : enc.codes) {
      next_id_before_.push_back(dec_.codebook().next_id());
      dec_.step(c, scratch);
      history_.push_back(c);
    }
    flat_len_ += scratch.size();
    prompt_len_ = history_.size();
    prompt_ingested_ = true;
    return std::move(enc.codes);
  }

  /// Accepts a code sampled by the model. Only already-assigned ids are valid:
  /// an unassigned id has no projection row, so the model cannot produce it.
  StepInfo append_generated(TokenId code) {
    const Codebook& cb = dec_.codebook();
    if (code >= cb.next_id()) {
      throw Error(ErrorKind::UnknownCode, "generated code " + std::to_string(code) +
                                              " is not assigned (next id " + std::to_string(cb.next_id()) + ")");
    }
    prompt_ingested_ = true;
    next_id_before_.push_back(cb.next_id());
    StepInfo info;
    auto added = dec_.step(code, info.flat_tokens);
    if (added && added->added()) info.new_entry = NewEntry{added->id, dec_.codebook().flatten(added->id)};
    history_.push_back(code);
    flat_len_ += info.flat_tokens.size();
    return info;
  }

  /// Base tokens of the generated segment only.
  BaseSeq finalize_output() const {
    BaseSeq out;
    for (TokenId c : generated()) dec_.codebook().append_flat(c, out);
    return out;
  }

  /// Consecutive generated codes whose joint expansion was already a single
  /// entry when the first of them was emitted.
  std::vector<CanonicalityViolation> canonicality_report() const {
    std::vector<CanonicalityViolation> out;
    const Codebook& cb = dec_.codebook();
    BaseSeq joined;
    for (std::size_t i = prompt_len_; i + 1 < history_.size(); ++i) {
      joined.clear();
      cb.append_flat(history_[i], joined);
      cb.append_flat(history_[i + 1], joined);
      auto id = cb.lookup(joined);
      if (id && *id < next_id_before_[i]) {
        out.push_back({i - prompt_len_, {history_[i], history_[i + 1]}, *id});
      }
    }
    return out;
  }

  /// Rebuilds a session from its parameters and recorded history.
  static Session replay(const CodebookParams& params, std::span<const TokenId> history, std::size_t prompt_len) {
    if (prompt_len > history.size()) throw Error(ErrorKind::InvalidArgument, "prompt_len exceeds history");
    Session s(params);
    BaseSeq scratch;
    for (std::size_t i = 0; i < prompt_len; ++i) {
      s.next_id_before_.push_back(s.dec_.codebook().next_id());
      s.dec_.step(history[i], scratch);
      s.history_.push_back(history[i]);
    }
    s.flat_len_ = scratch.size();
    s.prompt_len_ = prompt_len;
    s.prompt_ingested_ = true;
    for (std::size_t i = prompt_len; i < history.size(); ++i) s.append_generated(history[i]);
    return s;
  }

  const Codebook& codebook() const noexcept { return dec_.codebook(); }
  const CodebookParams params() const { return dec_.codebook().params(); }
  std::span<const TokenId> history() const noexcept { return history_; }
  std::span<const TokenId> prompt_codes() const noexcept { return std::span(history_).first(prompt_len_); }
  std::span<const TokenId> generated() const noexcept { return std::span(history_).subspan(prompt_len_); }
  std::size_t prompt_len() const noexcept { return prompt_len_; }
  std::size_t flat_len() const noexcept { return flat_len_; }

 private:
  LzwDecoder dec_;
  std::vector<TokenId> history_;
  std::vector<TokenId> next_id_before_;  // next_id when history_[i] was appended
  std::size_t prompt_len_ = 0;
  std::size_t flat_len_ = 0;
  bool prompt_ingested_ = false;
};

}  // namespace z2z
