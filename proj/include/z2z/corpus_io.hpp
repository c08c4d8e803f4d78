#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "z2z/error.hpp"
#include "z2z/types.hpp"

namespace z2z {

struct TokenDoc {
  std::string id;
  std::vector<TokenId> tokens;
  friend bool operator==(const TokenDoc&, const TokenDoc&) = default;
};

struct CodeDoc {
  std::string id;
  std::vector<TokenId> codes;
  std::uint64_t codebook_entries = 0;
  friend bool operator==(const CodeDoc&, const CodeDoc&) = default;
};

inline constexpr std::size_t kByteVocabSize = 256;

/// One token per UTF-8 byte; token id == byte value.
inline std::vector<TokenId> byte_tokenize(std::string_view text) {
  std::vector<TokenId> out;
  out.reserve(text.size());
  for (char c : text) out.push_back(static_cast<unsigned char>(c));
  return out;
}

inline std::string byte_detokenize(std::span<const TokenId> tokens) {
  std::string out;
  out.reserve(tokens.size());
  for (TokenId t : tokens) {
    if (t >= kByteVocabSize) {
      throw Error(ErrorKind::TokenOutOfRange, "token " + std::to_string(t) + " is not a byte");
    }
    out.push_back(static_cast<char>(t));
  }
  return out;
}

/// Base vocabulary of an external tokenizer. Token strings are optional and
/// only used for rendering and byte counting.
struct ExternalVocab {
  std::size_t vocab_size = 0;
  std::optional<std::vector<std::string>> tokens;

  static ExternalVocab byte_fallback() {
    ExternalVocab v;
    v.vocab_size = kByteVocabSize;
    std::vector<std::string> t;
    for (std::size_t b = 0; b < kByteVocabSize; ++b) t.emplace_back(1, static_cast<char>(b));
    v.tokens = std::move(t);
    return v;
  }
};

inline ExternalVocab parse_external_vocab(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("vocab JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("vocab_size") || !j["vocab_size"].is_number_unsigned()) {
    throw Error(ErrorKind::ParseError, "vocab JSON needs a non-negative integer 'vocab_size'");
  }
  ExternalVocab v;
  v.vocab_size = j["vocab_size"].get<std::size_t>();
  if (v.vocab_size == 0) throw Error(ErrorKind::ParseError, "vocab_size must be >= 1");
  if (j.contains("tokens")) {
    const auto& t = j["tokens"];
    if (!t.is_array() || t.size() != v.vocab_size) {
      throw Error(ErrorKind::ParseError, "'tokens' must be an array of vocab_size strings");
    }
    std::vector<std::string> strings;
    strings.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!t[i].is_string()) throw Error(ErrorKind::ParseError, "tokens[" + std::to_string(i) + "] is not a string");
      strings.push_back(t[i].get<std::string>());
    }
    v.tokens = std::move(strings);
  }
  return v;
}

inline ExternalVocab load_external_vocab(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::ParseError, "cannot open vocab file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_external_vocab(ss.str());
}

namespace detail {

inline std::vector<TokenId> parse_id_array(const nlohmann::json& obj, const char* key, std::size_t line,
                                           std::optional<std::size_t> bound) {
  if (!obj.contains(key) || !obj[key].is_array()) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": missing array '" + key + "'");
  }
  const auto& arr = obj[key];
  std::vector<TokenId> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() > 0xFFFFFFFFull) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": '" + key +
                                             "' holds a non-integer or negative value " + v.dump());
    }
    const auto t = v.get<std::uint64_t>();
    if (bound && t >= *bound) {
      throw Error(ErrorKind::TokenOutOfRange, "line " + std::to_string(line) + ": value " + std::to_string(t) +
                                                  " >= vocab size " + std::to_string(*bound));
    }
    out.push_back(static_cast<TokenId>(t));
  }
  return out;
}

inline nlohmann::json parse_line_object(const std::string& line, std::size_t lineno) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected an object");
  if (!j.contains("id") || !j["id"].is_string()) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": missing string 'id'");
  }
  return j;
}

inline void write_ids(std::ostream& os, std::span<const TokenId> ids) {
  os << '[';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) os << ',';
    os << ids[i];
  }
  os << ']';
}

}  // namespace detail

/// Line-at-a-time reader for token JSONL ({"id": str, "tokens": [uint...]}).
/// Blank lines are skipped; every token is range-checked as the line is read.
class TokenDocReader {
 public:
  TokenDocReader(std::istream& is, std::size_t vocab_size) : is_(is), vocab_(vocab_size) {}

  std::optional<TokenDoc> next() {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto j = detail::parse_line_object(line, line_);
      return TokenDoc{j["id"].get<std::string>(), detail::parse_id_array(j, "tokens", line_, vocab_)};
    }
    return std::nullopt;
  }

  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& is_;
  std::size_t vocab_;
  std::size_t line_ = 0;
};

/// Reader for code JSONL ({"id": str, "codes": [uint...], "codebook_entries": uint}).
class CodeDocReader {
 public:
  explicit CodeDocReader(std::istream& is) : is_(is) {}

  std::optional<CodeDoc> next() {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto j = detail::parse_line_object(line, line_);
      CodeDoc d{j["id"].get<std::string>(), detail::parse_id_array(j, "codes", line_, std::nullopt), 0};
      if (j.contains("codebook_entries")) {
        if (!j["codebook_entries"].is_number_unsigned()) {
          throw Error(ErrorKind::ParseError, "line " + std::to_string(line_) + ": bad 'codebook_entries'");
        }
        d.codebook_entries = j["codebook_entries"].get<std::uint64_t>();
      }
      return d;
    }
    return std::nullopt;
  }

  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& is_;
  std::size_t line_ = 0;
};

inline std::vector<TokenDoc> read_token_docs(std::istream& is, std::size_t vocab_size) {
  TokenDocReader r(is, vocab_size);
  std::vector<TokenDoc> out;
  while (auto d = r.next()) out.push_back(std::move(*d));
  return out;
}

inline std::vector<TokenDoc> read_token_docs(const std::string& path, std::size_t vocab_size) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::ParseError, "cannot open " + path);
  return read_token_docs(is, vocab_size);
}

inline void write_token_doc(std::ostream& os, const TokenDoc& doc) {
  os << "{\"id\":" << nlohmann::json(doc.id).dump() << ",\"tokens\":";
  detail::write_ids(os, doc.tokens);
  os << "}\n";
}

inline void write_code_doc(std::ostream& os, const CodeDoc& doc) {
  os << "{\"id\":" << nlohmann::json(doc.id).dump() << ",\"codes\":";
  detail::write_ids(os, doc.codes);
  os << ",\"codebook_entries\":" << doc.codebook_entries << "}\n";
}

}  // namespace z2z
