// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "support/random_streams.hpp"
#include "support/reference_lzw.hpp"
#include "z2z/z2z.hpp"

namespace {

namespace fs = std::filesystem;
using z2z::BaseSeq;
using z2z::TokenId;

struct Args {
  std::string cli;
  fs::path source_dir;
  fs::path work_dir;
};

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult shell(const std::string& cmd) {
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  char buf[1 << 14];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

// Criteria 1, 3, 5 and the stream half of 8 share one pass over 10,000 streams.
struct StreamSuite {
  Outcome round_trip, sync, merge_bound, metrics;
  double seconds = 0;
  std::size_t m1_streams = 0;
};

StreamSuite run_stream_suite() {
  StreamSuite s;
  std::mt19937_64 rng(20240601);
  std::vector<z2z::testing::RandomCase> cases;
  cases.reserve(10000);
  for (int i = 0; i < 10000; ++i) cases.push_back(z2z::testing::random_case(rng, 4096));

  std::size_t entries_checked = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const auto enc = z2z::encode_all(c.params, c.stream);
    const auto dec = z2z::decode_all_with_codebook(c.params, enc.codes);
    if (dec.tokens != c.stream) s.round_trip.fail("stream " + std::to_string(i) + " differs after decode");
    if (!(dec.codebook == enc.codebook)) s.sync.fail("stream " + std::to_string(i) + " codebooks diverge");

    const auto& cb = enc.codebook;
    for (TokenId id = static_cast<TokenId>(c.params.base_vocab_size); id < cb.next_id(); ++id) {
      const auto len = cb.entry_length(id);
      ++entries_checked;
      if (len < 2 || len > c.params.max_merge) {
        s.merge_bound.fail("stream " + std::to_string(i) + " entry " + std::to_string(id) + " has length " +
                           std::to_string(len));
      }
    }
    if (c.params.capacity_limit && cb.size() > *c.params.capacity_limit) {
      s.merge_bound.fail("stream " + std::to_string(i) + " exceeds its capacity cap");
    }
    if (c.params.max_merge == 1) {
      ++s.m1_streams;
      if (enc.codes != c.stream) s.merge_bound.fail("stream " + std::to_string(i) + " M=1 codes differ from input");
    }

    if (!c.stream.empty()) {
      const double rate = z2z::compression_rate(c.stream.size(), enc.codes.size());
      if (!(rate > 0.0 && rate <= 100.0)) s.metrics.fail("rate " + fmt(rate) + " out of (0,100]");
      if (c.params.max_merge == 1 && rate != 100.0) s.metrics.fail("M=1 rate is not 100");
      const std::uint64_t bytes = 3 * c.stream.size() + i % 7;
      const double eta_base = z2z::token_efficiency(bytes, c.stream.size());
      const double eta_z2z = z2z::token_efficiency(bytes, enc.codes.size());
      const double expected = eta_base * static_cast<double>(c.stream.size()) / static_cast<double>(enc.codes.size());
      if (std::abs(eta_z2z - expected) > 1e-12 * expected) s.metrics.fail("eta identity off on stream " + std::to_string(i));
    }
  }
  s.seconds = seconds_since(t0);
  if (s.seconds >= 60.0) s.round_trip.fail("took " + fmt(s.seconds, 1) + " s");
  if (s.round_trip.pass) s.round_trip.detail = "10000 streams exact, " + fmt(s.seconds, 2) + " s";
  if (s.sync.pass) s.sync.detail = "10000 encoder/decoder codebook pairs identical";
  if (s.merge_bound.pass) {
    s.merge_bound.detail = std::to_string(entries_checked) + " entries within [2,M]; " + std::to_string(s.m1_streams) +
                           " M=1 streams uncompressed";
  }
  return s;
}

Outcome streaming_matches_batch() {
  Outcome o;
  std::mt19937_64 rng(77);
  for (int i = 0; i < 1000; ++i) {
    const auto c = z2z::testing::random_case(rng, 4096);
    z2z::LzwEncoder enc(c.params);
    std::vector<TokenId> streamed;
    for (TokenId t : c.stream) {
      if (auto code = enc.step(t)) streamed.push_back(*code);
    }
    if (auto code = enc.finalize()) streamed.push_back(*code);
    const auto batch = z2z::encode_all(c.params, c.stream);
    if (streamed != batch.codes) o.fail("stream " + std::to_string(i) + " differs");
    if (!(enc.codebook() == batch.codebook)) o.fail("stream " + std::to_string(i) + " codebook differs");
  }
  if (o.pass) o.detail = "1000 streams identical";
  return o;
}

Outcome golden_traces() {
  Outcome o;
  struct Trace {
    std::vector<TokenId> in;
    std::size_t m;
    std::vector<TokenId> codes;
  };
  const std::vector<Trace> traces{{{1, 2, 1, 2, 1, 2}, 3, {1, 2, 6, 6}},
                                  {{1, 1, 1, 1}, 3, {1, 6, 1}},
                                  {{1, 1, 1, 1, 1}, 2, {1, 6, 6}}};
  for (const auto& t : traces) {
    const z2z::CodebookParams p{6, t.m, std::nullopt};
    const auto enc = z2z::encode_all(p, t.in);
    if (enc.codes != t.codes) o.fail("golden trace mismatch");
    if (z2z::decode_all(p, enc.codes) != t.in) o.fail("golden trace does not decode");
  }
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    const std::size_t vocab = std::uniform_int_distribution<std::size_t>(2, 1000)(rng);
    const auto stream =
        z2z::testing::random_stream(rng, std::uniform_int_distribution<std::size_t>(0, 4096)(rng), vocab);
    // No merge bound: any entry length up to the stream length is allowed.
    const z2z::CodebookParams p{vocab, std::max<std::size_t>(stream.size(), 1), std::nullopt};
    const auto ours = z2z::encode_all(p, stream);
    const auto ref = z2z::testing::reference_encode(stream, static_cast<std::uint32_t>(vocab));
    if (ours.codes != ref.codes) o.fail("reference disagrees on stream " + std::to_string(i));
    if (ours.codebook.size() != ref.entries.size()) {
      o.fail("reference codebook size differs on stream " + std::to_string(i));
    } else {
      for (std::size_t k = 0; k < ref.entries.size(); ++k) {
        if (ours.codebook.flatten(static_cast<TokenId>(vocab + k)) != ref.entries[k]) {
          o.fail("reference entry differs on stream " + std::to_string(i));
          break;
        }
      }
    }
  }
  if (o.pass) o.detail = "3 hand traces exact; reference agrees on 100 unbounded streams";
  return o;
}

Outcome compression_trend(const Args& a) {
  Outcome o;
  std::ifstream in(a.source_dir / "data/sample_corpus.jsonl");
  if (!in) {
    o.fail("sample corpus missing");
    return o;
  }
  const auto docs = z2z::read_token_docs(in, z2z::kByteVocabSize);
  std::vector<double> rates;
  for (std::size_t m = 1; m <= 4; ++m) {
    const auto r = z2z::corpus_report(docs, {{z2z::kByteVocabSize, m, std::nullopt}, 2048, false});
    rates.push_back(r.compression_rate_pct);
  }
  std::string shown;
  for (std::size_t m = 0; m < rates.size(); ++m) shown += " M=" + std::to_string(m + 1) + ":" + fmt(rates[m], 2);
  if (z2z::round2(rates[0]) != 100.0) o.fail("M=1 rate " + fmt(rates[0], 2));
  if (!(rates[1] > rates[2] && rates[2] > rates[3])) o.fail("rates not strictly decreasing:" + shown);
  if (o.pass) o.detail = "rates" + shown;
  return o;
}

Outcome flops_table() {
  Outcome o;
  struct Row {
    std::size_t l, m, lenc;
    double alpha;
  };
  const std::vector<Row> rows{{14, 2, 1, 0.14}, {32, 2, 2, 0.13}, {80, 3, 3, 0.11}, {128, 3, 4, 0.09}};
  std::string shown;
  for (const auto& r : rows) {
    const double got = z2z::round2(z2z::flops_overhead({r.l, r.m, r.lenc, 1.0}).alpha);
    shown += " " + fmt(got, 2);
    if (got != r.alpha) o.fail("alpha for L=" + std::to_string(r.l) + " is " + fmt(got, 4));
  }
  if (o.pass) o.detail = "alpha" + shown;
  return o;
}

z2z::MockConfig random_mock_config(std::mt19937_64& rng) {
  z2z::MockConfig cfg;
  cfg.vocab_size = std::uniform_int_distribution<std::size_t>(2, 300)(rng);
  cfg.max_merge = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
  cfg.dim = std::uniform_int_distribution<std::size_t>(1, 16)(rng);
  cfg.seed = rng();
  cfg.steps = std::uniform_int_distribution<std::size_t>(0, 64)(rng);
  if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
    cfg.capacity_limit = std::uniform_int_distribution<std::size_t>(0, 20)(rng);
  }
  cfg.prompt = z2z::testing::random_stream(rng, std::uniform_int_distribution<std::size_t>(0, 200)(rng), cfg.vocab_size);
  return cfg;
}

Outcome metrics_identities(const Outcome& stream_part) {
  Outcome o = stream_part;
  if (z2z::byte_perplexity(4.0, 2.0) != 2.0) o.fail("byte_perplexity(4,2) != 2");
  std::mt19937_64 rng(55);
  for (int i = 0; i < 300; ++i) {
    const auto r = z2z::mock_decode_loop(random_mock_config(rng));
    if (!(r.reuse_rate >= 0.0 && r.reuse_rate <= 1.0)) o.fail("reuse_rate " + fmt(r.reuse_rate) + " on mock run");
  }
  if (o.pass) o.detail = "rates in (0,100], eta identity to 1e-12, byte_ppl(4,2)=2, 300 mock reuse rates in [0,1]";
  return o;
}

Outcome embedding_path() {
  Outcome o;
  std::mt19937_64 rng(66);
  const auto table = z2z::EmbeddingTable::hashed(200, 12, 5);
  auto enc = z2z::HyperEncoder::averaging(6);
  for (int i = 0; i < 1000; ++i) {
    BaseSeq seq(std::uniform_int_distribution<std::size_t>(1, 6)(rng));
    for (auto& t : seq) t = std::uniform_int_distribution<TokenId>(0, 199)(rng);
    const auto v = enc.embed(table, seq);
    for (std::size_t j = 0; j < 12; ++j) {
      long double s = 0;
      for (TokenId t : seq) s += table.row(t)[j];
      if (std::abs(v[j] - static_cast<double>(s / seq.size())) > 1e-12) o.fail("average off by more than 1e-12");
    }
  }

  std::normal_distribution<double> nd(0, 8);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> l(std::uniform_int_distribution<std::size_t>(1, 500)(rng));
    for (auto& x : l) x = nd(rng);
    const auto a = z2z::softmax_argmax(l);
    double sum = 0;
    for (double p : a.probs) sum += p;
    if (std::abs(sum - 1.0) > 1e-9) o.fail("softmax sums to " + fmt(sum, 12));
    const double shift = nd(rng) * 20;
    for (auto& x : l) x += shift;
    const auto b = z2z::softmax_argmax(l);
    if (b.argmax != a.argmax) o.fail("argmax changes under shift");
    for (std::size_t k = 0; k < l.size(); ++k) {
      if (std::abs(a.probs[k] - b.probs[k]) > 1e-12) {
        o.fail("probabilities change under shift");
        break;
      }
    }
  }

  for (int i = 0; i < 200; ++i) {
    const auto cfg = random_mock_config(rng);
    const auto r = z2z::mock_decode_loop(cfg);
    std::vector<TokenId> assigned;
    for (TokenId id = static_cast<TokenId>(cfg.vocab_size); id < r.codebook.next_id(); ++id) assigned.push_back(id);
    if (r.cache_keys != assigned) o.fail("cache keys differ from assigned hypertoken ids");
    if (r.hyper_embed_calls != r.codebook.size()) {
      o.fail("hyper_embed called " + std::to_string(r.hyper_embed_calls) + " times for " +
             std::to_string(r.codebook.size()) + " hypertokens");
    }
  }

  auto kind_of = [](const std::function<void()>& fn) -> std::optional<z2z::ErrorKind> {
    try {
      fn();
    } catch (const z2z::Error& e) {
      return e.kind();
    }
    return std::nullopt;
  };
  z2z::Codebook cb(4, 3);
  cb.try_add(BaseSeq{1, 2});
  const auto small = z2z::EmbeddingTable::hashed(4, 3, 1);
  z2z::HyperCache cache;
  const std::vector<double> hidden{1, 0, 0};
  if (kind_of([&] { z2z::joint_logits(hidden, small, cache, cb); }) != z2z::ErrorKind::CacheIncomplete) {
    o.fail("missing cache entry not reported as CacheIncomplete");
  }
  auto enc3 = z2z::HyperEncoder::averaging(3);
  if (kind_of([&] { cache.get_or_insert(5, enc3, small, cb); }) != z2z::ErrorKind::UnknownCode) {
    o.fail("unassigned id not reported as UnknownCode");
  }
  z2z::LzwDecoder dec(z2z::CodebookParams{4, 3, std::nullopt});
  BaseSeq sink;
  if (kind_of([&] { dec.step(9, sink); }) != z2z::ErrorKind::UnknownCode) o.fail("decoder accepted unknown code");

  if (o.pass) o.detail = "mean exact, softmax normalized and shift invariant, cache mirrors codebook, both failure modes raised";
  return o;
}

Outcome session_pipeline(const Args& a) {
  Outcome o;
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 500; ++i) {
    const auto c = z2z::testing::random_case(rng, 1024);
    const auto cont = z2z::testing::random_stream(rng, std::uniform_int_distribution<std::size_t>(0, 1024)(rng),
                                                  c.params.base_vocab_size);
    z2z::Session s(c.params);
    s.ingest_prompt(c.stream);
    // Encoder-as-model: emit the longest codebook match of the continuation.
    for (std::size_t pos = 0; pos < cont.size();) {
      const auto m = s.codebook().longest_match(cont, pos);
      s.append_generated(m.code);
      pos += m.consumed;
    }
    if (s.finalize_output() != cont) o.fail("pair " + std::to_string(i) + " continuation differs");
  }

  const fs::path golden = a.source_dir / "tests/golden/mock_loop_seed0.json";
  const std::string expected = slurp(golden);
  if (expected.empty()) {
    o.fail("golden file missing");
    return o;
  }
  z2z::MockConfig cfg;
  cfg.prompt = {1, 2, 1, 2, 1, 2};
  cfg.steps = 8;
  cfg.seed = 0;
  if (z2z::mock_result_to_json(z2z::mock_decode_loop(cfg)).dump(2) + "\n" != expected) {
    o.fail("library mock loop differs from golden file");
  }
  const auto cli = shell(a.cli + " generate-sim --prompt-ids 1,2,1,2,1,2 --steps 8 --seed 0");
  if (cli.exit_code != 0 || cli.out != expected) o.fail("CLI mock loop differs from golden file");
  if (o.pass) o.detail = "500 pairs reproduced; golden file byte-identical (library and CLI)";
  return o;
}

// Word-level text with heavy phrase reuse, emitted as byte-fallback tokens.
void write_bench_corpus(const fs::path& path, std::size_t target_bytes) {
  static const std::vector<std::string> words{
      "the",   "a",      "token", "stream", "model",  "window", "of",      "and",   "to",     "in",
      "is",    "code",   "book",  "entry",  "merge",  "every",  "decoder", "cache", "prompt", "context",
      "with",  "for",    "this",  "that",   "value",  "return", "while",   "data",  "input",  "output",
      "over",  "under",  "long",  "short",  "pass",   "step",   "line",    "new",   "old",    "first"};
  std::mt19937_64 rng(11);
  std::ofstream out(path, std::ios::binary);
  std::size_t bytes = 0;
  for (std::size_t doc = 0; bytes < target_bytes; ++doc) {
    std::string text;
    while (text.size() < 16384) {
      const std::size_t n = std::uniform_int_distribution<std::size_t>(4, 14)(rng);
      for (std::size_t k = 0; k < n; ++k) {
        if (k) text += ' ';
        text += words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)];
      }
      text += std::uniform_int_distribution<int>(0, 4)(rng) ? ". " : ".\n";
    }
    text.resize(std::min(text.size(), target_bytes - bytes));
    bytes += text.size();
    z2z::write_token_doc(out, {std::to_string(doc), z2z::byte_tokenize(text)});
  }
}

Outcome throughput(const Args& a) {
  Outcome o;
  const fs::path corpus = a.work_dir / "bench_10mb.jsonl";
  write_bench_corpus(corpus, 10u * 1000 * 1000);
  const auto r = shell(a.cli + " bench --byte-fallback --max-merge 3 --window 2048 --repeats 3 --input " +
                       corpus.string() + " --output " + (a.work_dir / "bench.json").string());
  if (r.exit_code != 0) {
    o.fail("bench exited with " + std::to_string(r.exit_code));
    return o;
  }
  const auto j = nlohmann::json::parse(slurp(a.work_dir / "bench.json"));
  const double c = j["tokens_per_sec_compress"].get<double>();
  const double d = j["tokens_per_sec_decompress"].get<double>();
  o.detail = "compress " + fmt(c / 1e6, 2) + " M tok/s, decompress " + fmt(d / 1e6, 2) + " M tok/s over " +
             std::to_string(j["base_tokens"].get<std::uint64_t>()) + " tokens, p50 " + fmt(j["p50_ms"].get<double>(), 4) +
             " ms, p99 " + fmt(j["p99_ms"].get<double>(), 4) + " ms";
  if (j["base_tokens"].get<std::uint64_t>() < 10u * 1000 * 1000) o.fail("corpus smaller than 10 MB");
  if (c < 1e6) {
    const std::string d0 = o.detail;
    o.fail("below 1M tok/s: " + d0);
  }
  return o;
}

Outcome cli_round_trip(const Args& a) {
  Outcome o;
  const fs::path in = a.work_dir / "cli_corpus.jsonl";
  const fs::path out = a.work_dir / "cli_roundtrip.jsonl";
  {
    std::mt19937_64 rng(12);
    std::ofstream f(in, std::ios::binary);
    for (int i = 0; i < 1000; ++i) {
      const std::size_t len = std::uniform_int_distribution<std::size_t>(0, 3000)(rng);
      z2z::write_token_doc(f, {"doc-" + std::to_string(i), z2z::testing::random_stream(rng, len, 256)});
    }
  }
  const auto r = shell(a.cli + " compress --byte-fallback --input " + in.string() + " | " + a.cli +
                       " decompress --byte-fallback --output " + out.string());
  const std::string original = slurp(in);
  if (r.exit_code != 0) o.fail("pipeline exited with " + std::to_string(r.exit_code));
  if (slurp(out) != original) o.fail("round trip not byte-identical");

  const fs::path trace = a.work_dir / "trace.jsonl";
  std::ofstream(trace) << "{\"id\":\"trace\",\"tokens\":[1,2,1,2,1,2]}\n";
  const auto vis = shell(a.cli + " visualize --vocab-size 6 --max-merge 3 --format html --input " + trace.string());
  std::vector<std::string> classes;
  for (std::size_t pos = 0; (pos = vis.out.find("<span class=\"", pos)) != std::string::npos;) {
    pos += 13;
    classes.push_back(vis.out.substr(pos, vis.out.find('"', pos) - pos));
  }
  const std::vector<std::string> want{"z2z-base", "z2z-base", "z2z-h2", "z2z-h2"};
  if (classes != want) o.fail("visualize classes differ from [base, base, h2, h2]");
  if (o.pass) o.detail = "1000 documents byte-identical (" + std::to_string(original.size()) + " bytes); spans [base, base, h2, h2]";
  return o;
}

void report(int n, const std::string& name, const Outcome& o, int& failures) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name << "): " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

Outcome guarded(const std::function<Outcome()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    Outcome o;
    o.fail(std::string("exception: ") + e.what());
    return o;
  }
}

}  // namespace

int main(int argc, char** argv) {
  Args a;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string k = argv[i];
    if (k == "--cli") a.cli = argv[i + 1];
    else if (k == "--source-dir") a.source_dir = argv[i + 1];
    else if (k == "--work-dir") a.work_dir = argv[i + 1];
  }
  if (a.cli.empty() || a.source_dir.empty() || a.work_dir.empty()) {
    std::cerr << "usage: z2z_acceptance --cli PATH --source-dir DIR --work-dir DIR\n";
    return 2;
  }
  fs::create_directories(a.work_dir);

  int failures = 0;
  StreamSuite streams;
  try {
    streams = run_stream_suite();
  } catch (const std::exception& e) {
    streams.round_trip.fail(std::string("exception: ") + e.what());
    streams.sync = streams.merge_bound = streams.metrics = streams.round_trip;
  }
  report(1, "lossless round trip", streams.round_trip, failures);
  report(2, "streaming equals batch", guarded(streaming_matches_batch), failures);
  report(3, "codebook sync", streams.sync, failures);
  report(4, "golden traces and reference", guarded(golden_traces), failures);
  report(5, "merge-size bound", streams.merge_bound, failures);
  report(6, "compression trend", guarded([&] { return compression_trend(a); }), failures);
  report(7, "FLOPs table", guarded(flops_table), failures);
  report(8, "metrics identities", guarded([&] { return metrics_identities(streams.metrics); }), failures);
  report(9, "embedding path", guarded(embedding_path), failures);
  report(10, "session pipeline", guarded([&] { return session_pipeline(a); }), failures);
  report(11, "throughput", guarded([&] { return throughput(a); }), failures);
  report(12, "CLI round trip", guarded([&] { return cli_round_trip(a); }), failures);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
