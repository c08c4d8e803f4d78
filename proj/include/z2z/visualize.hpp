#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "z2z/codebook.hpp"
#include "z2z/types.hpp"

namespace z2z {

/// Coloring class of an emitted code by how many base tokens it covers.
enum class SpanClass { Base, H2, H3Plus };

constexpr std::string_view css_class(SpanClass c) noexcept {
  switch (c) {
    case SpanClass::Base: return "z2z-base";
    case SpanClass::H2: return "z2z-h2";
    case SpanClass::H3Plus: return "z2z-h3plus";
  }
  return "z2z-base";
}

constexpr SpanClass span_class_for_length(std::size_t constituents) noexcept {
  if (constituents <= 1) return SpanClass::Base;
  if (constituents == 2) return SpanClass::H2;
  return SpanClass::H3Plus;
}

inline std::vector<SpanClass> classify_codes(std::span<const TokenId> codes, const Codebook& cb) {
  std::vector<SpanClass> out;
  out.reserve(codes.size());
  for (TokenId c : codes) out.push_back(span_class_for_length(cb.entry_length(c)));
  return out;
}

/// Display text of a code: concatenated token strings when a vocabulary with
/// strings is given, otherwise the base ids as "[a b c]".
inline std::string code_text(TokenId code, const Codebook& cb, const std::vector<std::string>* token_strings) {
  const BaseSeq flat = cb.flatten(code);
  std::string s;
  if (token_strings) {
    for (TokenId t : flat) s += (*token_strings)[t];
    return s;
  }
  s = "[";
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(flat[i]);
  }
  return s + "]";
}

inline std::string html_escape(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr std::string_view kVisualizeCss =
    ".z2z-base{background:#cfe2ff}.z2z-h2{background:#fff3b0}.z2z-h3plus{background:#ffd0a0}"
    "pre.z2z{white-space:pre-wrap;font-family:monospace}";

/// One <pre> panel of <span class="z2z-..."> elements, one per code.
inline std::string render_html_panel(std::span<const TokenId> codes, const Codebook& cb,
                                     const std::vector<std::string>* token_strings, std::string_view title = {}) {
  std::string out;
  if (!title.empty()) out += "<h3>" + html_escape(title) + "</h3>\n";
  out += "<pre class=\"z2z\">";
  for (TokenId c : codes) {
    out += "<span class=\"";
    out += css_class(span_class_for_length(cb.entry_length(c)));
    out += "\" title=\"" + std::to_string(c) + "\">";
    out += html_escape(code_text(c, cb, token_strings));
    out += "</span>";
  }
  out += "</pre>\n";
  return out;
}

inline std::string html_document(std::string_view body) {
  std::string out = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><style>";
  out += kVisualizeCss;
  out += "</style></head><body>\n";
  out += body;
  out += "</body></html>\n";
  return out;
}

/// Blue base tokens, yellow two-token hypertokens, orange longer ones.
inline std::string render_ansi(std::span<const TokenId> codes, const Codebook& cb,
                               const std::vector<std::string>* token_strings) {
  std::string out;
  for (TokenId c : codes) {
    switch (span_class_for_length(cb.entry_length(c))) {
      case SpanClass::Base: out += "\x1b[44m"; break;
      case SpanClass::H2: out += "\x1b[43m"; break;
      case SpanClass::H3Plus: out += "\x1b[48;5;208m"; break;
    }
    out += code_text(c, cb, token_strings);
    out += "\x1b[0m";
  }
  return out;
}

}  // namespace z2z
