#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "z2z/codebook.hpp"
#include "z2z/corpus_io.hpp"
#include "z2z/error.hpp"
#include "z2z/lzw.hpp"
#include "z2z/types.hpp"

namespace z2z {

/// Bytes of text per token.
inline double token_efficiency(std::uint64_t bytes, std::uint64_t tokens) {
  if (tokens == 0) throw Error(ErrorKind::ZeroTokens, "token efficiency needs at least one token");
  return static_cast<double>(bytes) / static_cast<double>(tokens);
}

/// Compressed token count as a percentage of the original count.
inline double compression_rate(std::uint64_t n_orig, std::uint64_t n_comp) {
  if (n_orig == 0) throw Error(ErrorKind::InvalidCounts, "original token count must be >= 1");
  if (n_comp > n_orig) {
    throw Error(ErrorKind::InvalidCounts,
                "compressed count " + std::to_string(n_comp) + " exceeds original " + std::to_string(n_orig));
  }
  return static_cast<double>(n_comp) / static_cast<double>(n_orig) * 100.0;
}

/// Number of distinct hypertokens referenced in `history`. Creation through
/// the add rule does not count as a use.
inline std::size_t reused_hypertokens(std::span<const TokenId> history, const Codebook& cb) {
  std::vector<bool> used(cb.size(), false);
  std::size_t n = 0;
  for (TokenId c : history) {
    if (cb.is_base(c)) continue;
    if (!cb.contains(c)) {
      throw Error(ErrorKind::UnknownCode, "history code " + std::to_string(c) + " is not in the codebook");
    }
    const std::size_t i = c - cb.base_vocab_size();
    if (!used[i]) {
      used[i] = true;
      ++n;
    }
  }
  return n;
}

/// Fraction of hypertokens in `cb` that appear in `history`; 0 when there are
/// no hypertokens.
inline double reuse_rate(std::span<const TokenId> history, const Codebook& cb) {
  if (cb.empty()) return 0.0;
  return static_cast<double>(reused_hypertokens(history, cb)) / static_cast<double>(cb.size());
}

/// Token-level perplexity converted to per-byte: ppl^(1/eta).
inline double byte_perplexity(double token_ppl, double eta) {
  if (!(token_ppl >= 1.0) || !std::isfinite(token_ppl)) {
    throw Error(ErrorKind::DomainError, "token perplexity must be finite and >= 1");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(ErrorKind::DomainError, "eta must be finite and > 0");
  return std::pow(token_ppl, 1.0 / eta);
}

struct FlopsParams {
  std::size_t base_layers = 0;     // L
  std::size_t max_merge = 0;       // M
  std::size_t encoder_layers = 0;  // l
  double rho = 1.0;                // compressed / original token ratio
};

struct FlopsOverhead {
  double alpha = 0.0;  // hyper-encoder overhead relative to the base model
  double ratio = 0.0;  // z2z FLOPs / baseline FLOPs
};

/// alpha = l*M/L, ratio = rho*(1 + alpha).
inline FlopsOverhead flops_overhead(const FlopsParams& p) {
  if (p.base_layers == 0 || p.max_merge == 0 || p.encoder_layers == 0) {
    throw Error(ErrorKind::InvalidArgument, "layer counts and max_merge must be positive");
  }
  if (!(p.rho > 0.0 && p.rho <= 1.0)) throw Error(ErrorKind::DomainError, "rho must lie in (0, 1]");
  const double alpha = static_cast<double>(p.encoder_layers * p.max_merge) / static_cast<double>(p.base_layers);
  return {alpha, p.rho * (1.0 + alpha)};
}

/// Half-away-from-zero rounding to two decimals, for table display.
inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

struct WindowRecord {
  std::size_t doc_index = 0;
  std::string doc_id;
  std::size_t window_index = 0;
  std::uint64_t base_tokens = 0;
  std::uint64_t compressed_tokens = 0;
  std::uint64_t hypertokens = 0;
  std::uint64_t reused_hypertokens = 0;
};

struct EfficiencyReport {
  std::optional<std::uint64_t> bytes;  // unknown for size-only vocabularies
  std::uint64_t documents = 0;
  std::uint64_t base_tokens = 0;
  std::uint64_t compressed_tokens = 0;
  std::optional<double> eta_base;
  std::optional<double> eta_z2z;
  double compression_rate_pct = 100.0;
  double reuse_rate = 0.0;  // pooled over windows
  std::size_t max_merge = 0;
  std::size_t window = 0;
  std::uint64_t hypertokens = 0;
  std::uint64_t reused_hypertokens = 0;
  std::vector<WindowRecord> per_window;
};

struct ReportParams {
  CodebookParams codebook;
  std::size_t window = 2048;
  bool keep_windows = true;
};

/// Returns the UTF-8 byte count of a document, or nullopt if unknown.
using ByteCounter = std::function<std::optional<std::uint64_t>(const TokenDoc&)>;

/// Streaming accumulator behind corpus_report: each document is cut into
/// non-overlapping windows and every window is compressed with a fresh
/// codebook.
class CorpusAccumulator {
 public:
  explicit CorpusAccumulator(ReportParams params, ByteCounter bytes = {})
      : params_(std::move(params)), bytes_(std::move(bytes)), enc_(params_.codebook) {
    if (params_.window == 0) throw Error(ErrorKind::InvalidArgument, "window must be >= 1");
    if (bytes_) total_bytes_ = 0;
  }

  void add(const TokenDoc& doc) {
    if (bytes_ && total_bytes_) {
      auto b = bytes_(doc);
      if (b) *total_bytes_ += *b;
      else total_bytes_.reset();
    }
    std::span<const TokenId> all(doc.tokens);
    std::size_t w = 0;
    for (std::size_t start = 0; start < all.size(); start += params_.window, ++w) {
      auto chunk = all.subspan(start, std::min(params_.window, all.size() - start));
      enc_.reset();
      codes_.clear();
      for (TokenId t : chunk) {
        if (auto c = enc_.step(t)) codes_.push_back(*c);
      }
      if (auto c = enc_.finalize()) codes_.push_back(*c);
      const Codebook& cb = enc_.codebook();
      const std::uint64_t reused = reused_hypertokens(codes_, cb);
      report_.base_tokens += chunk.size();
      report_.compressed_tokens += codes_.size();
      report_.hypertokens += cb.size();
      report_.reused_hypertokens += reused;
      if (params_.keep_windows) {
        report_.per_window.push_back({docs_, doc.id, w, chunk.size(), codes_.size(), cb.size(), reused});
      }
    }
    ++docs_;
  }

  EfficiencyReport finish() const {
    EfficiencyReport r = report_;
    r.documents = docs_;
    r.window = params_.window;
    r.max_merge = params_.codebook.max_merge;
    r.bytes = total_bytes_;
    if (r.base_tokens == 0) throw Error(ErrorKind::ZeroTokens, "corpus contains no tokens");
    r.compression_rate_pct = compression_rate(r.base_tokens, r.compressed_tokens);
    if (r.bytes) {
      r.eta_base = token_efficiency(*r.bytes, r.base_tokens);
      r.eta_z2z = token_efficiency(*r.bytes, r.compressed_tokens);
    }
    r.reuse_rate = r.hypertokens == 0 ? 0.0
                                      : static_cast<double>(r.reused_hypertokens) / static_cast<double>(r.hypertokens);
    return r;
  }

 private:
  ReportParams params_;
  ByteCounter bytes_;
  LzwEncoder enc_;
  std::vector<TokenId> codes_;
  EfficiencyReport report_;
  std::optional<std::uint64_t> total_bytes_;
  std::uint64_t docs_ = 0;
};

inline EfficiencyReport corpus_report(std::span<const TokenDoc> docs, const ReportParams& params,
                                      ByteCounter bytes = {}) {
  CorpusAccumulator acc(params, std::move(bytes));
  for (const auto& d : docs) acc.add(d);
  return acc.finish();
}

}  // namespace z2z
