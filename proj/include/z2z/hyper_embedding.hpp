#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "z2z/codebook.hpp"
#include "z2z/error.hpp"
#include "z2z/types.hpp"

namespace z2z {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Deterministic embedding value in [-1, 1):
///   h = splitmix64(splitmix64(splitmix64(seed) ^ token) ^ dim_index)
///   value = (h >> 11) * 2^-53 * 2 - 1
/// Integer-only up to the final scaling, so it is identical on every IEEE-754
/// platform.
constexpr double hashed_embedding_value(std::uint64_t seed, std::uint64_t token, std::uint64_t dim_index) noexcept {
  const std::uint64_t h = detail::splitmix64(detail::splitmix64(detail::splitmix64(seed) ^ token) ^ dim_index);
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

/// Dense base-token embeddings, row-major.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t vocab_size, std::size_t dim, std::vector<double> values)
      : vocab_(vocab_size), dim_(dim), values_(std::move(values)) {
    if (vocab_ == 0 || dim_ == 0) throw Error(ErrorKind::InvalidArgument, "embedding table needs vocab >= 1 and dim >= 1");
    if (values_.size() != vocab_ * dim_) {
      throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(vocab_ * dim_) + " values, got " +
                                                    std::to_string(values_.size()));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw Error(ErrorKind::DomainError, "embedding values must be finite");
    }
  }

  static EmbeddingTable hashed(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
    std::vector<double> values(vocab_size * dim);
    for (std::size_t t = 0; t < vocab_size; ++t) {
      for (std::size_t j = 0; j < dim; ++j) values[t * dim + j] = hashed_embedding_value(seed, t, j);
    }
    return EmbeddingTable(vocab_size, dim, std::move(values));
  }

  std::size_t vocab_size() const noexcept { return vocab_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> row(TokenId token) const {
    if (token >= vocab_) {
      throw Error(ErrorKind::TokenOutOfRange,
                  "token " + std::to_string(token) + " >= embedding rows " + std::to_string(vocab_));
    }
    return std::span<const double>(values_).subspan(std::size_t{token} * dim_, dim_);
  }

  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t vocab_;
  std::size_t dim_;
  std::vector<double> values_;
};

// Binary table file: "Z2ZE", u32 version, u32 vocab, u32 dim, then vocab*dim
// little-endian f32 values, row-major.
inline constexpr std::uint32_t kEmbeddingFileVersion = 1;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is, const char* what) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw Error(ErrorKind::ParseError, std::string("embedding file truncated reading ") + what);
  }
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}

}  // namespace detail

inline void write_embedding_table(std::ostream& os, const EmbeddingTable& table) {
  os.write("Z2ZE", 4);
  detail::put_u32(os, kEmbeddingFileVersion);
  detail::put_u32(os, static_cast<std::uint32_t>(table.vocab_size()));
  detail::put_u32(os, static_cast<std::uint32_t>(table.dim()));
  for (double v : table.values()) detail::put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

inline EmbeddingTable read_embedding_table(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "Z2ZE", 4) != 0) {
    throw Error(ErrorKind::ParseError, "embedding file: bad magic");
  }
  const auto version = detail::get_u32(is, "version");
  if (version != kEmbeddingFileVersion) {
    throw Error(ErrorKind::ParseError, "embedding file: unsupported version " + std::to_string(version));
  }
  const std::size_t vocab = detail::get_u32(is, "vocab");
  const std::size_t dim = detail::get_u32(is, "dim");
  std::vector<double> values(vocab * dim);
  for (auto& v : values) v = std::bit_cast<float>(detail::get_u32(is, "values"));
  return EmbeddingTable(vocab, dim, std::move(values));
}

inline void save_embedding_table(const std::string& path, const EmbeddingTable& table) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot open " + path + " for writing");
  write_embedding_table(os, table);
}

inline EmbeddingTable load_embedding_table(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  return read_embedding_table(is);
}

/// Maps the constituent base embeddings of a hypertoken to one vector.
///
/// The built-in variant averages the actual constituents (padding positions
/// do not contribute, so a length-1 input is returned unchanged). An external
/// callable can stand in for a trained encoder or an untied projection head;
/// it receives between 1 and max_merge rows and must return `dim` values.
class HyperEncoder {
 public:
  using ExternalFn = std::function<std::vector<double>(std::span<const std::span<const double>>)>;

  static HyperEncoder averaging(std::size_t max_merge) { return HyperEncoder(max_merge, nullptr); }
  static HyperEncoder external(std::size_t max_merge, ExternalFn fn) {
    if (!fn) throw Error(ErrorKind::InvalidArgument, "external hyper-encoder must be callable");
    return HyperEncoder(max_merge, std::move(fn));
  }

  bool is_averaging() const noexcept { return !fn_; }
  std::size_t max_merge() const noexcept { return max_merge_; }
  std::size_t calls() const noexcept { return calls_; }

  std::vector<double> embed(const EmbeddingTable& table, std::span<const TokenId> seq) {
    if (seq.empty() || seq.size() > max_merge_) {
      throw Error(ErrorKind::InvalidArgument, "hyper_embed expects 1.." + std::to_string(max_merge_) +
                                                  " tokens, got " + std::to_string(seq.size()));
    }
    ++calls_;
    const std::size_t d = table.dim();
    if (fn_) {
      rows_.clear();
      for (TokenId t : seq) rows_.push_back(table.row(t));
      std::vector<double> out = fn_(rows_);
      if (out.size() != d) {
        throw Error(ErrorKind::DimensionMismatch,
                    "external hyper-encoder returned " + std::to_string(out.size()) + " values, expected " +
                        std::to_string(d));
      }
      return out;
    }
    std::vector<double> out(d, 0.0);
    for (TokenId t : seq) {
      auto r = table.row(t);
      for (std::size_t j = 0; j < d; ++j) out[j] += r[j];
    }
    const double n = static_cast<double>(seq.size());
    for (double& v : out) v /= n;
    return out;
  }

 private:
  HyperEncoder(std::size_t max_merge, ExternalFn fn) : max_merge_(max_merge), fn_(std::move(fn)) {
    if (max_merge_ == 0) throw Error(ErrorKind::InvalidArgument, "max_merge must be >= 1");
  }

  std::size_t max_merge_;
  ExternalFn fn_;
  std::size_t calls_ = 0;
  std::vector<std::span<const double>> rows_;
};

/// Insert-only store of hypertoken vectors. Hypertoken embeddings do not
/// depend on context, so each id is computed at most once.
class HyperCache {
 public:
  const std::vector<double>& get_or_insert(TokenId id, HyperEncoder& encoder, const EmbeddingTable& table,
                                           const Codebook& cb) {
    if (!cb.contains(id)) {
      throw Error(ErrorKind::UnknownCode, "hypertoken " + std::to_string(id) + " is not assigned");
    }
    if (cb.is_base(id)) throw Error(ErrorKind::InvalidArgument, "id " + std::to_string(id) + " is a base token");
    auto it = vectors_.find(id);
    if (it != vectors_.end()) return it->second;
    return vectors_.emplace(id, encoder.embed(table, cb.entry(id))).first->second;
  }

  /// Computes every assigned hypertoken that is not cached yet.
  void sync(HyperEncoder& encoder, const EmbeddingTable& table, const Codebook& cb) {
    for (TokenId id = static_cast<TokenId>(cb.base_vocab_size()); id < cb.next_id(); ++id) {
      get_or_insert(id, encoder, table, cb);
    }
  }

  const std::vector<double>* find(TokenId id) const {
    auto it = vectors_.find(id);
    return it == vectors_.end() ? nullptr : &it->second;
  }

  bool contains(TokenId id) const { return vectors_.contains(id); }
  std::size_t size() const noexcept { return vectors_.size(); }

  std::vector<TokenId> keys() const {
    std::vector<TokenId> out;
    out.reserve(vectors_.size());
    for (const auto& [k, v] : vectors_) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::unordered_map<TokenId, std::vector<double>> vectors_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Tied-weight logits over base tokens followed by hypertokens, ordered by id.
inline std::vector<double> joint_logits(std::span<const double> hidden, const EmbeddingTable& table,
                                        const HyperCache& cache, const Codebook& cb) {
  if (hidden.size() != table.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "hidden size " + std::to_string(hidden.size()) +
                                                  " != embedding dim " + std::to_string(table.dim()));
  }
  if (table.vocab_size() != cb.base_vocab_size()) {
    throw Error(ErrorKind::DimensionMismatch, "embedding rows do not match base_vocab_size");
  }
  std::vector<double> logits;
  logits.reserve(cb.next_id());
  for (TokenId t = 0; t < cb.base_vocab_size(); ++t) logits.push_back(dot(hidden, table.row(t)));
  for (TokenId id = static_cast<TokenId>(cb.base_vocab_size()); id < cb.next_id(); ++id) {
    const auto* v = cache.find(id);
    if (!v) throw Error(ErrorKind::CacheIncomplete, "no vector cached for hypertoken " + std::to_string(id));
    logits.push_back(dot(hidden, *v));
  }
  return logits;
}

struct SoftmaxResult {
  std::vector<double> probs;
  TokenId argmax = 0;
};

/// Numerically stable softmax; ties in argmax go to the smallest id.
inline SoftmaxResult softmax_argmax(std::span<const double> logits) {
  if (logits.empty()) throw Error(ErrorKind::InvalidArgument, "softmax over empty logits");
  std::size_t best = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) throw Error(ErrorKind::DomainError, "non-finite logit at " + std::to_string(i));
    if (logits[i] > logits[best]) best = i;
  }
  const double top = logits[best];
  SoftmaxResult r;
  r.probs.resize(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += (r.probs[i] = std::exp(logits[i] - top));
  for (double& p : r.probs) p /= sum;
  r.argmax = static_cast<TokenId>(best);
  return r;
}

}  // namespace z2z
