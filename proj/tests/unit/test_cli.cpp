#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support/random_streams.hpp"
#include "z2z/corpus_io.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(Z2Z_CLI_PATH) + " " + args;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("z2z_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
            std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, CompressDecompressRoundTrip) {
  std::mt19937_64 rng(5);
  std::ostringstream corpus;
  for (int i = 0; i < 60; ++i) {
    z2z::write_token_doc(corpus, {"doc" + std::to_string(i), z2z::testing::random_stream(rng, i * 37 % 900, 256)});
  }
  const auto in = write("in.jsonl", corpus.str());
  for (const char* extra : {"--max-merge 3 --threads 1", "--max-merge 5 --threads 4", "--max-merge 2 --capacity 7"}) {
    const std::string e(extra);
    ASSERT_EQ(run("compress --byte-fallback " + e + " --input " + in.string() + " --output " + path("c.jsonl"))
                  .exit_code,
              0);
    ASSERT_EQ(run("decompress --byte-fallback " + e + " --input " + path("c.jsonl") + " --output " + path("d.jsonl"))
                  .exit_code,
              0);
    EXPECT_EQ(slurp(path("d.jsonl")), corpus.str()) << extra;
  }
}

TEST_F(Cli, MaxMergeOneIsIdentity) {
  const auto in = write("in.jsonl", "{\"id\":\"a\",\"tokens\":[1,2,1,2,1,2]}\n");
  const auto r = run("compress --vocab-size 6 --max-merge 1 --input " + in.string());
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "{\"id\":\"a\",\"codes\":[1,2,1,2,1,2],\"codebook_entries\":0}\n");
}

TEST_F(Cli, TraceCompressionAndCodebookSidecar) {
  const auto in = write("in.jsonl", "{\"id\":\"a\",\"tokens\":[1,2,1,2,1,2]}\n");
  const auto r = run("compress --vocab-size 6 --input " + in.string() + " --codebooks " + path("cb.jsonl"));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "{\"id\":\"a\",\"codes\":[1,2,6,6],\"codebook_entries\":3}\n");
  const auto cb = nlohmann::json::parse(slurp(path("cb.jsonl")));
  EXPECT_EQ(cb["codebook"]["entries"], nlohmann::json::parse("[[1,2],[2,1],[1,2,1]]"));
}

TEST_F(Cli, MalformedInputExitsTwoWithLineNumber) {
  const auto in = write("bad.jsonl", "{\"id\":\"a\",\"tokens\":[1]}\n{\"id\":\"b\",\"tokens\":[1,\n");
  const auto r = run("compress --vocab-size 6 --input " + in.string() + " 2>" + path("err.txt"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(slurp(path("err.txt")).find("line 2"), std::string::npos);

  const auto range = write("range.jsonl", "{\"id\":\"a\",\"tokens\":[1,7]}\n");
  EXPECT_EQ(run("compress --vocab-size 6 --input " + range.string() + " 2>/dev/null").exit_code, 2);
  EXPECT_EQ(run("compress --vocab-size 6 --byte-fallback 2>/dev/null </dev/null").exit_code, 2);
  EXPECT_EQ(run("compress --max-merge 0 2>/dev/null </dev/null").exit_code, 2);
  EXPECT_EQ(run("nonsense 2>/dev/null").exit_code, 2);
}

TEST_F(Cli, DecompressRejectsMismatchedSettings) {
  const auto in = write("c.jsonl", "{\"id\":\"a\",\"codes\":[1,2,6,6],\"codebook_entries\":3}\n");
  EXPECT_EQ(run("decompress --vocab-size 6 --input " + in.string()).out, "{\"id\":\"a\",\"tokens\":[1,2,1,2,1,2]}\n");
  EXPECT_EQ(run("decompress --vocab-size 6 --max-merge 2 --input " + in.string() + " 2>/dev/null").exit_code, 2);
  const auto unknown = write("u.jsonl", "{\"id\":\"a\",\"codes\":[1,9],\"codebook_entries\":1}\n");
  EXPECT_EQ(run("decompress --vocab-size 6 --input " + unknown.string() + " 2>/dev/null").exit_code, 2);
}

TEST_F(Cli, StatsJsonAndTable) {
  const auto in = write("in.jsonl", "{\"id\":\"a\",\"tokens\":[1,2,1,2,1,2]}\n");
  const auto j = run("stats --vocab-size 6 --format json --input " + in.string());
  ASSERT_EQ(j.exit_code, 0);
  const auto parsed = nlohmann::json::parse(j.out);
  EXPECT_EQ(parsed["base_tokens"], 6);
  EXPECT_EQ(parsed["compressed_tokens"], 4);
  EXPECT_TRUE(parsed["eta_base"].is_null());
  const auto t = run("stats --vocab-size 6 --format table --input " + in.string());
  EXPECT_NE(t.out.find("66.67"), std::string::npos) << t.out;

  const auto text = write("t.jsonl", "{\"id\":\"a\",\"tokens\":[65,66,65,66,65,66,65,66]}\n");
  const auto b = nlohmann::json::parse(run("stats --byte-fallback --input " + text.string()).out);
  EXPECT_EQ(b["eta_base"], 1.0);
  EXPECT_GT(b["eta_z2z"].get<double>(), 1.0);

  const auto empty = write("e.jsonl", "");
  EXPECT_EQ(run("stats --input " + empty.string() + " 2>/dev/null").exit_code, 2);
}

TEST_F(Cli, AblateProducesOneRowPerM) {
  const auto in = write("in.jsonl", "{\"id\":\"a\",\"tokens\":[1,2,3,1,2,3,1,2,3,1,2,3,1,2,3,1,2,3]}\n");
  const auto r = run("ablate-m --vocab-size 6 --m-min 1 --m-max 4 --format json --input " + in.string());
  ASSERT_EQ(r.exit_code, 0);
  const auto rows = nlohmann::json::parse(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0]["compression_rate_pct"], 100.0);
  const auto t = run("ablate-m --vocab-size 6 --m-max 2 --input " + in.string());
  EXPECT_NE(t.out.find("Compression Rate(%)"), std::string::npos);
}

TEST_F(Cli, VisualizeGoldenTrace) {
  const auto in = write("in.jsonl", "{\"id\":\"a\",\"tokens\":[1,2,1,2,1,2]}\n");
  const auto r = run("visualize --vocab-size 6 --format html --input " + in.string());
  ASSERT_EQ(r.exit_code, 0);
  std::vector<std::string> classes;
  for (std::size_t pos = 0; (pos = r.out.find("<span class=\"", pos)) != std::string::npos;) {
    pos += 13;
    classes.push_back(r.out.substr(pos, r.out.find('"', pos) - pos));
  }
  EXPECT_EQ(classes, (std::vector<std::string>{"z2z-base", "z2z-base", "z2z-h2", "z2z-h2"}));
  const auto a = run("visualize --vocab-size 6 --format ansi --input " + in.string());
  EXPECT_NE(a.out.find("\x1b[43m"), std::string::npos);
}

TEST_F(Cli, PrecomputeIsDeterministic) {
  const auto in = write("in.jsonl", "{\"id\":\"a\",\"tokens\":[1,2,1,2,1,2,3,3,3,3]}\n");
  const auto a = run("precompute-codebook --vocab-size 6 --input " + in.string());
  const auto b = run("precompute-codebook --vocab-size 6 --input " + in.string());
  ASSERT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j["codes"], nlohmann::json::parse("[1,2,6,6,3,10,3]"));

  const auto split = run("precompute-codebook --vocab-size 6 --window 4 --input " + in.string());
  std::istringstream lines(split.out);
  std::string line;
  std::vector<std::string> ids;
  while (std::getline(lines, line)) ids.push_back(nlohmann::json::parse(line)["id"]);
  EXPECT_EQ(ids, (std::vector<std::string>{"a#0", "a#1", "a#2"}));
}

TEST_F(Cli, GenerateSimMatchesGolden) {
  const auto r = run("generate-sim --prompt-ids 1,2,1,2,1,2 --steps 8 --seed 0");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, slurp(fs::path(Z2Z_SOURCE_DIR) / "tests/golden/mock_loop_seed0.json"));

  const auto zero = nlohmann::json::parse(run("generate-sim --prompt-ids 1,2,1,2,1,2 --steps 0").out);
  EXPECT_EQ(zero["prompt_codes"], nlohmann::json::parse("[1,2,256,256]"));
  EXPECT_TRUE(zero["generated_codes"].empty());

  const auto text = write("p.txt", "abab");
  const auto t = nlohmann::json::parse(run("generate-sim --steps 0 --input " + text.string()).out);
  EXPECT_EQ(t["prompt_codes"], nlohmann::json::parse("[97,98,256]"));
  EXPECT_EQ(run("generate-sim --prompt-ids 1,x 2>/dev/null").exit_code, 2);
}

TEST_F(Cli, BenchReportsFigures) {
  std::mt19937_64 rng(9);
  std::ostringstream corpus;
  for (int i = 0; i < 5; ++i) z2z::write_token_doc(corpus, {std::to_string(i), z2z::testing::random_stream(rng, 3000, 256)});
  const auto in = write("in.jsonl", corpus.str());
  const auto r = run("bench --repeats 1 --input " + in.string());
  ASSERT_EQ(r.exit_code, 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const char* k : {"tokens_per_sec_compress", "tokens_per_sec_decompress", "p50_ms", "p99_ms"}) {
    EXPECT_GT(j[k].get<double>(), 0.0) << k;
  }
  const auto empty = write("e.jsonl", "");
  EXPECT_EQ(run("bench --input " + empty.string() + " 2>" + path("err.txt")).exit_code, 2);
  EXPECT_NE(slurp(path("err.txt")).find("no documents"), std::string::npos);
}

TEST_F(Cli, TokenizeProducesByteTokens) {
  const auto in = write("t.txt", "hi\nyo\n");
  EXPECT_EQ(run("tokenize --input " + in.string()).out, "{\"id\":\"0\",\"tokens\":[104,105,10,121,111,10]}\n");
  EXPECT_EQ(run("tokenize --split-lines --input " + in.string()).out,
            "{\"id\":\"0\",\"tokens\":[104,105]}\n{\"id\":\"1\",\"tokens\":[121,111]}\n");
}

}  // namespace
