#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <span>
#include <vector>

#include "z2z/corpus_io.hpp"
#include "z2z/error.hpp"
#include "z2z/lzw.hpp"
#include "z2z/metrics.hpp"

namespace z2z {

struct BenchOptions {
  CodebookParams codebook;
  std::size_t window = 2048;
  std::size_t warmup = 1;
  std::size_t repeats = 3;
  std::size_t latency_doc_tokens = 1000;
};

struct BenchResult {
  std::uint64_t documents = 0;
  std::uint64_t base_tokens = 0;
  std::uint64_t compressed_tokens = 0;
  double tokens_per_sec_compress = 0.0;
  double tokens_per_sec_decompress = 0.0;
  double p50_ms = 0.0;  // compress latency of one latency_doc_tokens slice
  double p99_ms = 0.0;
  double compress_seconds = 0.0;
  double decompress_seconds = 0.0;
};

namespace detail {

inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1) + 0.5);
  return v[std::min(idx, v.size() - 1)];
}

}  // namespace detail

/// Single-threaded compress/decompress throughput. Every document is cut
/// into windows with a fresh codebook each; throughput uses the fastest of
/// `repeats` timed passes after `warmup` untimed ones. Each pass verifies the
/// round trip.
inline BenchResult run_bench(std::span<const TokenDoc> docs, const BenchOptions& opt) {
  using clock = std::chrono::steady_clock;
  if (docs.empty()) throw Error(ErrorKind::InvalidArgument, "no documents");
  if (opt.window == 0 || opt.latency_doc_tokens == 0) throw Error(ErrorKind::InvalidArgument, "window must be >= 1");

  BenchResult r;
  r.documents = docs.size();
  std::vector<std::span<const TokenId>> windows;
  for (const auto& d : docs) {
    std::span<const TokenId> all(d.tokens);
    for (std::size_t s = 0; s < all.size(); s += opt.window) {
      windows.push_back(all.subspan(s, std::min(opt.window, all.size() - s)));
    }
    r.base_tokens += d.tokens.size();
  }
  if (r.base_tokens == 0) throw Error(ErrorKind::InvalidArgument, "no tokens in corpus");

  LzwEncoder enc(opt.codebook);
  LzwDecoder dec(opt.codebook);
  std::vector<std::vector<TokenId>> codes(windows.size());
  BaseSeq decoded;

  double best_c = 1e300, best_d = 1e300;
  for (std::size_t pass = 0; pass < opt.warmup + opt.repeats; ++pass) {
    const auto t0 = clock::now();
    for (std::size_t w = 0; w < windows.size(); ++w) {
      enc.reset();
      auto& out = codes[w];
      out.clear();
      for (TokenId t : windows[w]) {
        if (auto c = enc.step(t)) out.push_back(*c);
      }
      if (auto c = enc.finalize()) out.push_back(*c);
    }
    const auto t1 = clock::now();
    for (std::size_t w = 0; w < windows.size(); ++w) {
      dec.reset();
      decoded.clear();
      for (TokenId c : codes[w]) dec.step(c, decoded);
      if (!std::equal(decoded.begin(), decoded.end(), windows[w].begin(), windows[w].end())) {
        throw Error(ErrorKind::InvariantViolation, "round trip mismatch in window " + std::to_string(w));
      }
    }
    const auto t2 = clock::now();
    if (pass >= opt.warmup) {
      best_c = std::min(best_c, std::chrono::duration<double>(t1 - t0).count());
      best_d = std::min(best_d, std::chrono::duration<double>(t2 - t1).count());
    }
  }
  for (const auto& c : codes) r.compressed_tokens += c.size();
  r.compress_seconds = best_c;
  r.decompress_seconds = best_d;
  r.tokens_per_sec_compress = static_cast<double>(r.base_tokens) / std::max(best_c, 1e-12);
  r.tokens_per_sec_decompress = static_cast<double>(r.base_tokens) / std::max(best_d, 1e-12);

  std::vector<double> lat;
  for (const auto& d : docs) {
    std::span<const TokenId> all(d.tokens);
    for (std::size_t s = 0; s < all.size(); s += opt.latency_doc_tokens) {
      auto slice = all.subspan(s, std::min(opt.latency_doc_tokens, all.size() - s));
      const auto t0 = clock::now();
      enc.reset();
      std::size_t n = 0;
      for (TokenId t : slice) n += enc.step(t).has_value();
      n += enc.finalize().has_value();
      const auto t1 = clock::now();
      if (n == 0) throw Error(ErrorKind::InvariantViolation, "empty output for non-empty slice");
      lat.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
  }
  r.p50_ms = detail::percentile(lat, 0.50);
  r.p99_ms = detail::percentile(lat, 0.99);
  return r;
}

}  // namespace z2z
