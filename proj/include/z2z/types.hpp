#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace z2z {

/// Base tokens live in [0, base_vocab_size); hypertokens follow contiguously.
using TokenId = std::uint32_t;

/// A flattened run of base tokens.
using BaseSeq = std::vector<TokenId>;

struct CodebookParams {
  std::size_t base_vocab_size = 256;
  std::size_t max_merge = 3;
  std::optional<std::size_t> capacity_limit;
};

}  // namespace z2z
