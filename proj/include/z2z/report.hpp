#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "z2z/bench.hpp"
#include "z2z/metrics.hpp"

namespace z2z {

inline nlohmann::json report_to_json(const EfficiencyReport& r, bool include_windows = false) {
  nlohmann::json j;
  j["documents"] = r.documents;
  j["base_tokens"] = r.base_tokens;
  j["compressed_tokens"] = r.compressed_tokens;
  j["bytes"] = r.bytes ? nlohmann::json(*r.bytes) : nlohmann::json(nullptr);
  j["eta_base"] = r.eta_base ? nlohmann::json(*r.eta_base) : nlohmann::json(nullptr);
  j["eta_z2z"] = r.eta_z2z ? nlohmann::json(*r.eta_z2z) : nlohmann::json(nullptr);
  j["compression_rate_pct"] = r.compression_rate_pct;
  j["reuse_rate"] = r.reuse_rate;
  j["hypertokens"] = r.hypertokens;
  j["reused_hypertokens"] = r.reused_hypertokens;
  j["max_merge"] = r.max_merge;
  j["window"] = r.window;
  if (include_windows) {
    auto w = nlohmann::json::array();
    for (const auto& rec : r.per_window) {
      w.push_back({{"doc_index", rec.doc_index},
                   {"doc_id", rec.doc_id},
                   {"window_index", rec.window_index},
                   {"base_tokens", rec.base_tokens},
                   {"compressed_tokens", rec.compressed_tokens},
                   {"hypertokens", rec.hypertokens},
                   {"reused_hypertokens", rec.reused_hypertokens}});
    }
    j["per_window"] = std::move(w);
  }
  return j;
}

namespace detail {

inline std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", round2(v));
  return buf;
}

inline std::string opt2(const std::optional<double>& v) { return v ? fmt2(*v) : std::string("n/a"); }

}  // namespace detail

inline std::string report_to_table(const EfficiencyReport& r) {
  char buf[512];
  std::string out;
  auto line = [&](const char* k, const std::string& v) {
    std::snprintf(buf, sizeof buf, "%-22s %s\n", k, v.c_str());
    out += buf;
  };
  line("documents", std::to_string(r.documents));
  line("max_merge", std::to_string(r.max_merge));
  line("window", std::to_string(r.window));
  line("bytes", r.bytes ? std::to_string(*r.bytes) : "n/a");
  line("base_tokens", std::to_string(r.base_tokens));
  line("compressed_tokens", std::to_string(r.compressed_tokens));
  line("eta_base", detail::opt2(r.eta_base));
  line("eta_z2z", detail::opt2(r.eta_z2z));
  line("compression_rate_pct", detail::fmt2(r.compression_rate_pct));
  line("reuse_rate", detail::fmt2(r.reuse_rate));
  return out;
}

/// Rows of a max-merge sweep, one per M.
inline std::string ablation_to_table(const std::vector<EfficiencyReport>& rows) {
  std::string out = "  M  Compression Rate(%)  eta_z2z  reuse_rate\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%3zu  %19s  %7s  %10s\n", r.max_merge, detail::fmt2(r.compression_rate_pct).c_str(),
                  detail::opt2(r.eta_z2z).c_str(), detail::fmt2(r.reuse_rate).c_str());
    out += buf;
  }
  return out;
}

inline nlohmann::json ablation_to_json(const std::vector<EfficiencyReport>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) arr.push_back(report_to_json(r));
  return arr;
}

inline nlohmann::json bench_to_json(const BenchResult& b) {
  return {{"documents", b.documents},
          {"base_tokens", b.base_tokens},
          {"compressed_tokens", b.compressed_tokens},
          {"tokens_per_sec_compress", b.tokens_per_sec_compress},
          {"tokens_per_sec_decompress", b.tokens_per_sec_decompress},
          {"p50_ms", b.p50_ms},
          {"p99_ms", b.p99_ms},
          {"compress_seconds", b.compress_seconds},
          {"decompress_seconds", b.decompress_seconds}};
}

}  // namespace z2z
