#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "z2z/detail/flat_edge_map.hpp"
#include "z2z/error.hpp"
#include "z2z/types.hpp"

namespace z2z {

enum class AddStatus { Added, SkippedTooLong, SkippedDuplicate, SkippedCapacity };

struct AddResult {
  AddStatus status = AddStatus::SkippedDuplicate;
  TokenId id = 0;  // meaningful only when status == Added

  bool added() const noexcept { return status == AddStatus::Added; }
  friend bool operator==(const AddResult&, const AddResult&) = default;
};

struct Match {
  TokenId code = 0;
  std::size_t consumed = 0;
  friend bool operator==(const Match&, const Match&) = default;
};

/// Append-only hyper-vocabulary.
///
/// Hypertoken ids start at base_vocab_size and are assigned in creation
/// order. Each entry stores its flattened base-token expansion (length
/// 2..max_merge). A prefix tree over base tokens backs longest-match lookup;
/// tree nodes [0, base_vocab_size) are the base tokens themselves, further
/// nodes are allocated on demand and may or may not carry a hypertoken id.
class Codebook {
 public:
  explicit Codebook(const CodebookParams& params)
      : Codebook(params.base_vocab_size, params.max_merge, params.capacity_limit) {}

  Codebook(std::size_t base_vocab_size, std::size_t max_merge,
           std::optional<std::size_t> capacity_limit = std::nullopt)
      : base_vocab_size_(base_vocab_size), max_merge_(max_merge), capacity_limit_(capacity_limit) {
    if (base_vocab_size == 0) throw Error(ErrorKind::InvalidArgument, "base_vocab_size must be >= 1");
    if (max_merge == 0) throw Error(ErrorKind::InvalidArgument, "max_merge must be >= 1");
    if (base_vocab_size > kMaxVocab) {
      throw Error(ErrorKind::InvalidArgument, "base_vocab_size too large: " + std::to_string(base_vocab_size));
    }
    offsets_.push_back(0);
  }

  std::size_t base_vocab_size() const noexcept { return base_vocab_size_; }
  std::size_t max_merge() const noexcept { return max_merge_; }
  std::optional<std::size_t> capacity_limit() const noexcept { return capacity_limit_; }
  CodebookParams params() const { return {base_vocab_size_, max_merge_, capacity_limit_}; }

  /// Number of hypertokens.
  std::size_t size() const noexcept { return code_node_.size(); }
  bool empty() const noexcept { return code_node_.empty(); }
  TokenId next_id() const noexcept { return static_cast<TokenId>(base_vocab_size_ + size()); }

  bool is_base(TokenId code) const noexcept { return code < base_vocab_size_; }
  bool contains(TokenId code) const noexcept { return code < next_id(); }

  bool at_capacity() const noexcept { return capacity_limit_ && size() >= *capacity_limit_; }

  AddResult try_add(std::span<const TokenId> seq) {
    if (seq.empty()) throw Error(ErrorKind::InvalidArgument, "cannot add an empty sequence");
    for (TokenId t : seq) check_base(t);
    if (seq.size() > max_merge_) return {AddStatus::SkippedTooLong, 0};
    if (seq.size() == 1) return {AddStatus::SkippedDuplicate, 0};

    std::uint32_t node = seq[0];
    std::size_t i = 1;
    for (; i < seq.size(); ++i) {
      auto child = edges_.find(node, seq[i]);
      if (!child) break;
      node = *child;
    }
    if (i == seq.size() && node_code(node)) return {AddStatus::SkippedDuplicate, 0};
    if (at_capacity()) return {AddStatus::SkippedCapacity, 0};

    for (; i < seq.size(); ++i) node = new_node(node, seq[i]);
    return {AddStatus::Added, assign(node, seq)};
  }

  /// Adds flatten(prefix) + token. This is the LZW add rule in both the
  /// encoder and decoder; it avoids materialising the prefix when the entry
  /// turns out to be a duplicate or over-long.
  AddResult try_extend(TokenId prefix, TokenId token) {
    check_base(token);
    const std::size_t len = entry_length(prefix) + 1;
    if (len > max_merge_) return {AddStatus::SkippedTooLong, 0};
    const std::uint32_t parent = node_of(prefix);
    auto child = edges_.find(parent, token);
    if (child && node_code(*child)) return {AddStatus::SkippedDuplicate, 0};
    if (at_capacity()) return {AddStatus::SkippedCapacity, 0};

    const std::uint32_t node = child ? *child : new_node(parent, token);
    scratch_.clear();
    append_flat(prefix, scratch_);
    scratch_.push_back(token);
    return {AddStatus::Added, assign(node, scratch_)};
  }

  /// Id of flatten(code) + token if that sequence is a codebook entry.
  std::optional<TokenId> extension(TokenId code, TokenId token) const {
    auto child = edges_.find(node_of(code), token);
    if (!child) return std::nullopt;
    return node_code(*child);
  }

  /// Longest base-or-hyper match starting at stream[start]. consumed >= 1.
  Match longest_match(std::span<const TokenId> stream, std::size_t start) const {
    if (start >= stream.size()) throw Error(ErrorKind::InvalidArgument, "longest_match start past end of stream");
    check_base(stream[start]);
    Match best{stream[start], 1};
    std::uint32_t node = stream[start];
    for (std::size_t i = start + 1; i < stream.size() && i - start < max_merge_; ++i) {
      auto child = edges_.find(node, stream[i]);
      if (!child) break;
      node = *child;
      if (auto code = node_code(node)) best = {*code, i - start + 1};
    }
    return best;
  }

  /// Exact lookup of a base sequence; singletons resolve to the base id.
  std::optional<TokenId> lookup(std::span<const TokenId> seq) const {
    if (seq.empty() || seq[0] >= base_vocab_size_) return std::nullopt;
    std::uint32_t node = seq[0];
    for (std::size_t i = 1; i < seq.size(); ++i) {
      auto child = edges_.find(node, seq[i]);
      if (!child) return std::nullopt;
      node = *child;
    }
    return node_code(node);
  }

  BaseSeq flatten(TokenId code) const {
    BaseSeq out;
    append_flat(code, out);
    return out;
  }

  void append_flat(TokenId code, BaseSeq& out) const {
    check_code(code);
    if (is_base(code)) {
      out.push_back(code);
      return;
    }
    auto e = entry(code);
    out.insert(out.end(), e.begin(), e.end());
  }

  /// Stored expansion of a hypertoken. Base codes are rejected.
  std::span<const TokenId> entry(TokenId code) const {
    check_code(code);
    if (is_base(code)) throw Error(ErrorKind::InvalidArgument, "code " + std::to_string(code) + " is a base token");
    const std::size_t i = code - base_vocab_size_;
    return std::span<const TokenId>(storage_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }

  std::size_t entry_length(TokenId code) const {
    check_code(code);
    if (is_base(code)) return 1;
    const std::size_t i = code - base_vocab_size_;
    return offsets_[i + 1] - offsets_[i];
  }

  TokenId first_token(TokenId code) const {
    check_code(code);
    return is_base(code) ? code : storage_[offsets_[code - base_vocab_size_]];
  }

  /// Drops every hypertoken; parameters and allocations are kept.
  void clear() noexcept {
    storage_.clear();
    offsets_.assign(1, 0);
    code_node_.clear();
    extra_node_code_.clear();
    edges_.clear();
  }

  friend bool operator==(const Codebook& a, const Codebook& b) {
    return a.base_vocab_size_ == b.base_vocab_size_ && a.max_merge_ == b.max_merge_ &&
           a.capacity_limit_ == b.capacity_limit_ && a.offsets_ == b.offsets_ && a.storage_ == b.storage_;
  }

 private:
  static constexpr std::size_t kMaxVocab = std::size_t{1} << 31;
  static constexpr TokenId kNoCode = ~TokenId{0};

  void check_base(TokenId t) const {
    if (t >= base_vocab_size_) {
      throw Error(ErrorKind::TokenOutOfRange,
                  "token " + std::to_string(t) + " >= base_vocab_size " + std::to_string(base_vocab_size_));
    }
  }

  void check_code(TokenId code) const {
    if (code >= next_id()) {
      throw Error(ErrorKind::UnknownCode,
                  "code " + std::to_string(code) + " is not assigned (next id " + std::to_string(next_id()) + ")");
    }
  }

  std::optional<TokenId> node_code(std::uint32_t node) const noexcept {
    if (node < base_vocab_size_) return node;
    const TokenId c = extra_node_code_[node - base_vocab_size_];
    if (c == kNoCode) return std::nullopt;
    return c;
  }

  std::uint32_t node_of(TokenId code) const {
    check_code(code);
    return is_base(code) ? code : code_node_[code - base_vocab_size_];
  }

  std::uint32_t new_node(std::uint32_t parent, TokenId token) {
    const auto node = static_cast<std::uint32_t>(base_vocab_size_ + extra_node_code_.size());
    extra_node_code_.push_back(kNoCode);
    edges_.insert(parent, token, node);
    return node;
  }

  TokenId assign(std::uint32_t node, std::span<const TokenId> seq) {
    const TokenId id = next_id();
    extra_node_code_[node - base_vocab_size_] = id;
    code_node_.push_back(node);
    storage_.insert(storage_.end(), seq.begin(), seq.end());
    offsets_.push_back(static_cast<std::uint32_t>(storage_.size()));
    return id;
  }

  std::size_t base_vocab_size_;
  std::size_t max_merge_;
  std::optional<std::size_t> capacity_limit_;

  std::vector<TokenId> storage_;          // concatenated expansions
  std::vector<std::uint32_t> offsets_;    // entry i spans [offsets_[i], offsets_[i+1])
  std::vector<std::uint32_t> code_node_;  // hypertoken index -> tree node
  std::vector<TokenId> extra_node_code_;  // tree node - base_vocab_size -> code or kNoCode
  detail::FlatEdgeMap edges_;
  BaseSeq scratch_;
};

}  // namespace z2z
