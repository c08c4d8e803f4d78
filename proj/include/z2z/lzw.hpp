#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "z2z/codebook.hpp"
#include "z2z/error.hpp"
#include "z2z/types.hpp"

namespace z2z {

/// Streaming LZW encoder over base-token ids.
///
/// The window is tracked by the code of its current match, so extending it is
/// a single edge lookup. When window + token is not an entry, the window's
/// code is emitted and window + token is offered to the codebook; the add is
/// skipped (no id consumed) when it would exceed max_merge, duplicate an
/// entry, or overflow the capacity cap.
class LzwEncoder {
 public:
  explicit LzwEncoder(const CodebookParams& params) : cb_(params) {}
  explicit LzwEncoder(Codebook cb) : cb_(std::move(cb)) {}

  /// Returns the emitted code, if any.
  std::optional<TokenId> step(TokenId token) {
    if (token >= cb_.base_vocab_size()) {
      throw Error(ErrorKind::TokenOutOfRange, "token " + std::to_string(token) + " >= base_vocab_size " +
                                                  std::to_string(cb_.base_vocab_size()));
    }
    if (!window_) {
      window_ = token;
      return std::nullopt;
    }
    if (auto ext = cb_.extension(*window_, token)) {
      window_ = *ext;
      return std::nullopt;
    }
    const TokenId out = *window_;
    cb_.try_extend(out, token);
    window_ = token;
    ++emitted_;
    return out;
  }

  /// Flushes the residual window. A second call emits nothing.
  std::optional<TokenId> finalize() {
    if (!window_) return std::nullopt;
    const TokenId out = *window_;
    window_.reset();
    ++emitted_;
    return out;
  }

  /// Clears the window and the codebook.
  void reset() noexcept {
    window_.reset();
    emitted_ = 0;
    cb_.clear();
  }

  const Codebook& codebook() const noexcept { return cb_; }
  Codebook release_codebook() && { return std::move(cb_); }

  /// Code of the current window match, if the window is non-empty.
  std::optional<TokenId> window() const noexcept { return window_; }
  std::size_t window_length() const { return window_ ? cb_.entry_length(*window_) : 0; }
  std::size_t emitted_count() const noexcept { return emitted_; }

 private:
  Codebook cb_;
  std::optional<TokenId> window_;
  std::size_t emitted_ = 0;
};

/// Streaming LZW decoder. Rebuilds the encoder's codebook from the code
/// stream alone: after each code it offers prev + first(current) to the
/// codebook under the same skip conditions as the encoder.
class LzwDecoder {
 public:
  explicit LzwDecoder(const CodebookParams& params) : cb_(params) {}
  explicit LzwDecoder(Codebook cb) : cb_(std::move(cb)) {}

  /// Appends the expansion of `code` to `out` and returns the add outcome
  /// (nullopt for the first code, which has no predecessor).
  std::optional<AddResult> step(TokenId code, BaseSeq& out) {
    const TokenId next = cb_.next_id();
    std::optional<AddResult> added;
    if (code < next) {
      if (prev_) added = cb_.try_extend(*prev_, cb_.first_token(code));
      cb_.append_flat(code, out);
    } else if (code == next && prev_) {
      // The encoder emitted the entry it created on its previous step:
      // expansion is prev + first(prev).
      added = cb_.try_extend(*prev_, cb_.first_token(*prev_));
      if (!added->added() || added->id != code) {
        throw Error(ErrorKind::UnknownCode, "code " + std::to_string(code) + " cannot be reconstructed");
      }
      cb_.append_flat(code, out);
    } else {
      throw Error(ErrorKind::UnknownCode,
                  "code " + std::to_string(code) + " is not assigned (next id " + std::to_string(next) + ")");
    }
    prev_ = code;
    return added;
  }

  BaseSeq step(TokenId code) {
    BaseSeq out;
    step(code, out);
    return out;
  }

  void reset() noexcept {
    prev_.reset();
    cb_.clear();
  }

  const Codebook& codebook() const noexcept { return cb_; }
  Codebook release_codebook() && { return std::move(cb_); }
  std::optional<TokenId> previous() const noexcept { return prev_; }

 private:
  Codebook cb_;
  std::optional<TokenId> prev_;
};

struct EncodeResult {
  std::vector<TokenId> codes;
  Codebook codebook;
};

/// Batch encode: step over the whole stream then finalize. The returned
/// codebook is the fixed per-sequence codebook used for offline preprocessing.
inline EncodeResult encode_all(const CodebookParams& params, std::span<const TokenId> stream) {
  LzwEncoder enc(params);
  std::vector<TokenId> codes;
  codes.reserve(stream.size());
  for (TokenId t : stream) {
    if (auto c = enc.step(t)) codes.push_back(*c);
  }
  if (auto c = enc.finalize()) codes.push_back(*c);
  return {std::move(codes), std::move(enc).release_codebook()};
}

inline BaseSeq decode_all(const CodebookParams& params, std::span<const TokenId> codes) {
  LzwDecoder dec(params);
  BaseSeq out;
  out.reserve(codes.size() * 2);
  for (TokenId c : codes) dec.step(c, out);
  return out;
}

struct DecodeResult {
  BaseSeq tokens;
  Codebook codebook;
};

inline DecodeResult decode_all_with_codebook(const CodebookParams& params, std::span<const TokenId> codes) {
  LzwDecoder dec(params);
  BaseSeq out;
  for (TokenId c : codes) dec.step(c, out);
  return {std::move(out), std::move(dec).release_codebook()};
}

}  // namespace z2z
