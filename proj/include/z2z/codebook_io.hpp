#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "z2z/codebook.hpp"
#include "z2z/error.hpp"

namespace z2z {

inline constexpr int kCodebookFormatVersion = 1;

// {"format_version": 1, "base_vocab_size": V, "max_merge": M,
//  ["capacity_limit": C,] "entries": [[...], ...]}; entries[i] has id V + i.
inline nlohmann::json codebook_to_json(const Codebook& cb) {
  nlohmann::json j;
  j["format_version"] = kCodebookFormatVersion;
  j["base_vocab_size"] = cb.base_vocab_size();
  j["max_merge"] = cb.max_merge();
  if (cb.capacity_limit()) j["capacity_limit"] = *cb.capacity_limit();
  auto entries = nlohmann::json::array();
  for (TokenId id = static_cast<TokenId>(cb.base_vocab_size()); id < cb.next_id(); ++id) {
    auto e = cb.entry(id);
    entries.push_back(nlohmann::json(std::vector<TokenId>(e.begin(), e.end())));
  }
  j["entries"] = std::move(entries);
  return j;
}

inline std::string serialize_codebook(const Codebook& cb) { return codebook_to_json(cb).dump(); }

namespace detail {

inline std::uint64_t require_uint(const nlohmann::json& j, const char* field) {
  if (!j.contains(field)) throw Error(ErrorKind::ParseError, std::string("missing field '") + field + "'");
  const auto& v = j.at(field);
  if (!v.is_number_unsigned()) {
    throw Error(ErrorKind::ParseError, std::string("field '") + field + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace detail

inline Codebook codebook_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "codebook must be a JSON object");
  const auto version = detail::require_uint(j, "format_version");
  if (version != kCodebookFormatVersion) {
    throw Error(ErrorKind::ParseError, "unsupported format_version " + std::to_string(version));
  }
  const auto vocab = detail::require_uint(j, "base_vocab_size");
  const auto merge = detail::require_uint(j, "max_merge");
  std::optional<std::size_t> cap;
  if (j.contains("capacity_limit")) cap = detail::require_uint(j, "capacity_limit");
  if (vocab == 0 || merge == 0) throw Error(ErrorKind::ParseError, "base_vocab_size and max_merge must be >= 1");

  Codebook cb(vocab, merge, cap);
  if (!j.contains("entries") || !j.at("entries").is_array()) {
    throw Error(ErrorKind::ParseError, "missing or non-array field 'entries'");
  }
  const auto& entries = j.at("entries");
  BaseSeq seq;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string where = "entries[" + std::to_string(i) + "]";
    if (!e.is_array() || e.size() < 2) throw Error(ErrorKind::ParseError, where + " must be an array of >= 2 ids");
    seq.clear();
    for (const auto& t : e) {
      if (!t.is_number_unsigned() || t.get<std::uint64_t>() >= vocab) {
        throw Error(ErrorKind::ParseError, where + " holds an invalid base id " + t.dump());
      }
      seq.push_back(t.get<TokenId>());
    }
    const AddResult r = cb.try_add(seq);
    if (!r.added()) throw Error(ErrorKind::ParseError, where + " is duplicate, over-long or over capacity");
  }
  return cb;
}

inline Codebook deserialize_codebook(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("codebook JSON: ") + e.what());
  }
  return codebook_from_json(j);
}

}  // namespace z2z
