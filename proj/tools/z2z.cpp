// z2z: command-line front end for the hypertoken engine.

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "z2z/z2z.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInternal = 3;

struct Options {
  std::optional<std::size_t> vocab_size;
  std::string vocab_file;
  bool byte_fallback = false;
  std::size_t max_merge = 3;
  std::size_t window = 2048;
  std::optional<std::size_t> capacity;
  std::string input;
  std::string output;
  std::string format;
  std::uint64_t seed = 0;
  std::size_t steps = 16;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());

  std::string codebooks_out;
  bool per_window = false;
  std::size_t m_min = 1;
  std::size_t m_max = 5;
  std::string prompt_ids;
  std::size_t dim = 16;
  std::size_t warmup = 1;
  std::size_t repeats = 3;
  bool split_lines = false;
  bool window_given = false;
};

struct Vocab {
  std::size_t size = 0;
  std::optional<std::vector<std::string>> strings;
  bool bytes = false;
};

Vocab resolve_vocab(const Options& o) {
  if (o.vocab_size) {
    if (*o.vocab_size == 0) throw z2z::Error(z2z::ErrorKind::InvalidArgument, "--vocab-size must be >= 1");
    return {*o.vocab_size, std::nullopt, false};
  }
  if (!o.vocab_file.empty()) {
    auto v = z2z::load_external_vocab(o.vocab_file);
    return {v.vocab_size, std::move(v.tokens), false};
  }
  auto v = z2z::ExternalVocab::byte_fallback();
  return {v.vocab_size, std::move(v.tokens), true};
}

z2z::CodebookParams codebook_params(const Options& o, const Vocab& v) {
  if (o.max_merge == 0) throw z2z::Error(z2z::ErrorKind::InvalidArgument, "--max-merge must be >= 1");
  return {v.size, o.max_merge, o.capacity};
}

// Owns an optional file stream and falls back to stdin/stdout.
class Input {
 public:
  explicit Input(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*file_) throw z2z::Error(z2z::ErrorKind::InvalidArgument, "cannot open input " + path);
  }
  std::istream& get() { return file_ ? *file_ : std::cin; }

 private:
  std::unique_ptr<std::ifstream> file_;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw z2z::Error(z2z::ErrorKind::InvalidArgument, "cannot open output " + path);
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string read_all(std::istream& is) { return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()}; }

// Runs fn over items with up to `threads` workers; results keep input order.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& items, std::size_t threads, Fn fn) {
  using Out = decltype(fn(items.front()));
  std::vector<std::optional<Out>> slots(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        slots[i].emplace(fn(items[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min(std::max<std::size_t>(threads, 1), items.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  std::vector<Out> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

constexpr std::size_t kBatch = 512;

template <typename Reader, typename Fn>
void for_each_batch(Reader& reader, Fn fn) {
  using Doc = typename decltype(reader.next())::value_type;
  std::vector<Doc> batch;
  while (true) {
    batch.clear();
    while (batch.size() < kBatch) {
      auto d = reader.next();
      if (!d) break;
      batch.push_back(std::move(*d));
    }
    if (batch.empty()) return;
    fn(batch);
  }
}

z2z::Error with_doc(const z2z::Error& e, const std::string& id) {
  return z2z::Error(e.kind(), "document '" + id + "': " + std::string(e.what()));
}

int cmd_compress(const Options& o) {
  const Vocab v = resolve_vocab(o);
  const auto params = codebook_params(o, v);
  Input in(o.input);
  Output out(o.output);
  std::unique_ptr<Output> cb_out;
  if (!o.codebooks_out.empty()) cb_out = std::make_unique<Output>(o.codebooks_out);

  z2z::TokenDocReader reader(in.get(), v.size);
  for_each_batch(reader, [&](const std::vector<z2z::TokenDoc>& batch) {
    auto results = parallel_map(batch, o.threads, [&](const z2z::TokenDoc& d) {
      try {
        return z2z::encode_all(params, d.tokens);
      } catch (const z2z::Error& e) {
        throw with_doc(e, d.id);
      }
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      z2z::write_code_doc(out.get(), {batch[i].id, results[i].codes, results[i].codebook.size()});
      if (cb_out) {
        nlohmann::json j{{"id", batch[i].id}, {"codebook", z2z::codebook_to_json(results[i].codebook)}};
        cb_out->get() << j.dump() << '\n';
      }
    }
  });
  return 0;
}

int cmd_decompress(const Options& o) {
  const Vocab v = resolve_vocab(o);
  const auto params = codebook_params(o, v);
  Input in(o.input);
  Output out(o.output);
  z2z::CodeDocReader reader(in.get());
  for_each_batch(reader, [&](const std::vector<z2z::CodeDoc>& batch) {
    auto results = parallel_map(batch, o.threads, [&](const z2z::CodeDoc& d) {
      try {
        auto r = z2z::decode_all_with_codebook(params, d.codes);
        if (r.codebook.size() != d.codebook_entries) {
          throw z2z::Error(z2z::ErrorKind::ParseError,
                           "decoded codebook has " + std::to_string(r.codebook.size()) + " entries, file says " +
                               std::to_string(d.codebook_entries) + " (wrong --max-merge/--capacity?)");
        }
        return std::move(r.tokens);
      } catch (const z2z::Error& e) {
        throw with_doc(e, d.id);
      }
    });
    for (std::size_t i = 0; i < batch.size(); ++i) z2z::write_token_doc(out.get(), {batch[i].id, results[i]});
  });
  return 0;
}

z2z::ByteCounter byte_counter(const Vocab& v) {
  if (v.bytes) return [](const z2z::TokenDoc& d) -> std::optional<std::uint64_t> { return d.tokens.size(); };
  if (v.strings) {
    auto strings = std::make_shared<std::vector<std::string>>(*v.strings);
    return [strings](const z2z::TokenDoc& d) -> std::optional<std::uint64_t> {
      std::uint64_t n = 0;
      for (auto t : d.tokens) n += (*strings)[t].size();
      return n;
    };
  }
  return {};
}

z2z::EfficiencyReport run_report(const Options& o, const Vocab& v, std::size_t max_merge, std::istream& is,
                                 bool keep_windows) {
  z2z::ReportParams rp{{v.size, max_merge, o.capacity}, o.window, keep_windows};
  if (max_merge == 0) throw z2z::Error(z2z::ErrorKind::InvalidArgument, "--max-merge must be >= 1");
  z2z::CorpusAccumulator acc(rp, byte_counter(v));
  z2z::TokenDocReader reader(is, v.size);
  while (auto d = reader.next()) acc.add(*d);
  return acc.finish();
}

int cmd_stats(const Options& o) {
  const Vocab v = resolve_vocab(o);
  Input in(o.input);
  Output out(o.output);
  const auto r = run_report(o, v, o.max_merge, in.get(), o.per_window);
  if (o.format == "table") out.get() << z2z::report_to_table(r);
  else out.get() << z2z::report_to_json(r, o.per_window).dump(2) << '\n';
  return 0;
}

int cmd_ablate_m(const Options& o) {
  const Vocab v = resolve_vocab(o);
  if (o.m_min == 0 || o.m_max < o.m_min) {
    throw z2z::Error(z2z::ErrorKind::InvalidArgument, "need 1 <= --m-min <= --m-max");
  }
  Input in(o.input);
  const std::string corpus = read_all(in.get());
  std::vector<std::size_t> ms;
  for (std::size_t m = o.m_min; m <= o.m_max; ++m) ms.push_back(m);
  auto rows = parallel_map(ms, o.threads, [&](std::size_t m) {
    std::istringstream is(corpus);
    return run_report(o, v, m, is, false);
  });
  Output out(o.output);
  if (o.format == "json") out.get() << z2z::ablation_to_json(rows).dump(2) << '\n';
  else out.get() << z2z::ablation_to_table(rows);
  return 0;
}

std::vector<z2z::TokenId> parse_id_list(const std::string& s) {
  std::vector<z2z::TokenId> out;
  std::string cleaned = s;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream is(cleaned);
  std::string tok;
  while (is >> tok) {
    if (tok.find_first_not_of("0123456789") != std::string::npos || tok.size() > 10) {
      throw z2z::Error(z2z::ErrorKind::ParseError, "bad token id '" + tok + "' in --prompt-ids");
    }
    out.push_back(static_cast<z2z::TokenId>(std::stoull(tok)));
  }
  return out;
}

int cmd_generate_sim(const Options& o) {
  const Vocab v = resolve_vocab(o);
  z2z::MockConfig cfg;
  cfg.vocab_size = v.size;
  cfg.max_merge = o.max_merge;
  cfg.capacity_limit = o.capacity;
  cfg.seed = o.seed;
  cfg.steps = o.steps;
  cfg.dim = o.dim;
  if (!o.prompt_ids.empty()) {
    cfg.prompt = parse_id_list(o.prompt_ids);
  } else {
    if (!v.bytes) {
      throw z2z::Error(z2z::ErrorKind::InvalidArgument, "text prompts need the byte-fallback vocabulary; use --prompt-ids");
    }
    Input in(o.input);
    cfg.prompt = z2z::byte_tokenize(read_all(in.get()));
  }
  const auto r = z2z::mock_decode_loop(cfg);
  Output out(o.output);
  if (o.format == "table") {
    auto list = [](const auto& xs) {
      std::string s;
      for (auto x : xs) s += (s.empty() ? "" : " ") + std::to_string(x);
      return s;
    };
    out.get() << "prompt_codes:    " << list(r.prompt_codes) << '\n';
    if (o.steps > 0) {
      out.get() << "generated_codes: " << list(r.generated_codes) << '\n';
      out.get() << "flat_output:     " << list(r.flat_output) << '\n';
      out.get() << "reuse_rate:      " << z2z::detail::fmt2(r.reuse_rate) << '\n';
      out.get() << "violations:      " << r.violations.size() << '\n';
    }
  } else {
    out.get() << z2z::mock_result_to_json(r).dump(2) << '\n';
  }
  return 0;
}

int cmd_visualize(const Options& o) {
  const Vocab v = resolve_vocab(o);
  const auto params = codebook_params(o, v);
  Input in(o.input);
  Output out(o.output);
  const std::vector<std::string>* strings = v.strings ? &*v.strings : nullptr;
  z2z::TokenDocReader reader(in.get(), v.size);
  if (o.format == "ansi") {
    while (auto d = reader.next()) {
      const auto r = z2z::encode_all(params, d->tokens);
      out.get() << z2z::render_ansi(r.codes, r.codebook, strings) << '\n';
    }
    return 0;
  }
  std::string body;
  while (auto d = reader.next()) {
    const auto r = z2z::encode_all(params, d->tokens);
    body += z2z::render_html_panel(r.codes, r.codebook, strings, d->id);
  }
  out.get() << z2z::html_document(body);
  return 0;
}

int cmd_bench(const Options& o) {
  const Vocab v = resolve_vocab(o);
  Input in(o.input);
  const auto docs = z2z::read_token_docs(in.get(), v.size);
  z2z::BenchOptions bo;
  bo.codebook = codebook_params(o, v);
  bo.window = o.window;
  bo.warmup = o.warmup;
  bo.repeats = std::max<std::size_t>(o.repeats, 1);
  const auto r = z2z::run_bench(docs, bo);
  Output out(o.output);
  out.get() << z2z::bench_to_json(r).dump(2) << '\n';
  return 0;
}

int cmd_precompute_codebook(const Options& o) {
  const Vocab v = resolve_vocab(o);
  const auto params = codebook_params(o, v);
  Input in(o.input);
  Output out(o.output);
  z2z::TokenDocReader reader(in.get(), v.size);
  while (auto d = reader.next()) {
    std::vector<std::pair<std::string, std::span<const z2z::TokenId>>> seqs;
    std::span<const z2z::TokenId> all(d->tokens);
    if (!o.window_given || all.empty()) {
      seqs.emplace_back(d->id, all);
    } else {
      for (std::size_t s = 0, k = 0; s < all.size(); s += o.window, ++k) {
        seqs.emplace_back(d->id + "#" + std::to_string(k), all.subspan(s, std::min(o.window, all.size() - s)));
      }
    }
    for (const auto& [id, seq] : seqs) {
      const auto r = z2z::encode_all(params, seq);
      nlohmann::json j{{"id", id}, {"codes", r.codes}, {"codebook", z2z::codebook_to_json(r.codebook)}};
      out.get() << j.dump() << '\n';
    }
  }
  return 0;
}

int cmd_tokenize(const Options& o) {
  Input in(o.input);
  Output out(o.output);
  if (!o.split_lines) {
    z2z::write_token_doc(out.get(), {"0", z2z::byte_tokenize(read_all(in.get()))});
    return 0;
  }
  std::string line;
  for (std::size_t n = 0; std::getline(in.get(), line); ++n) {
    z2z::write_token_doc(out.get(), {std::to_string(n), z2z::byte_tokenize(line)});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"z2z: LZW hypertoken compression over token streams"};
  app.require_subcommand(1);
  Options o;

  auto add_vocab = [&](CLI::App* sub) {
    auto* a = sub->add_option("--vocab-size", o.vocab_size, "Size of the base vocabulary");
    auto* b = sub->add_option("--vocab", o.vocab_file, "Vocabulary JSON {\"vocab_size\", \"tokens\"?}");
    auto* c = sub->add_flag("--byte-fallback", o.byte_fallback, "256-entry byte vocabulary (default)");
    a->excludes(b)->excludes(c);
    b->excludes(c);
    sub->add_option("--max-merge", o.max_merge, "Maximum base tokens per hypertoken")->capture_default_str();
    sub->add_option("--capacity", o.capacity, "Hard cap on hypertokens per codebook");
  };
  auto add_io = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "Input path (default stdin)");
    sub->add_option("--output", o.output, "Output path (default stdout)");
  };
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "Worker threads")->capture_default_str();
  };

  auto* compress = app.add_subcommand("compress", "Token JSONL -> code JSONL");
  add_vocab(compress);
  add_io(compress);
  add_threads(compress);
  compress->add_option("--codebooks", o.codebooks_out, "Also write per-document codebook JSONL here");

  auto* decompress = app.add_subcommand("decompress", "Code JSONL -> token JSONL");
  add_vocab(decompress);
  add_io(decompress);
  add_threads(decompress);

  auto* stats = app.add_subcommand("stats", "Token efficiency and compression report");
  add_vocab(stats);
  add_io(stats);
  stats->add_option("--window", o.window, "Context window; codebook resets per window")->capture_default_str();
  stats->add_option("--format", o.format, "json|table")->check(CLI::IsMember({"json", "table"}));
  stats->add_flag("--per-window", o.per_window, "Include per-window records in JSON");

  auto* ablate = app.add_subcommand("ablate-m", "Compression rate across a range of max merge sizes");
  add_vocab(ablate);
  add_io(ablate);
  add_threads(ablate);
  ablate->add_option("--window", o.window, "Context window")->capture_default_str();
  ablate->add_option("--m-min", o.m_min, "Smallest M")->capture_default_str();
  ablate->add_option("--m-max", o.m_max, "Largest M")->capture_default_str();
  ablate->add_option("--format", o.format, "json|table")->check(CLI::IsMember({"json", "table"}));

  auto* gen = app.add_subcommand("generate-sim", "Deterministic mock decoding loop over a session");
  add_vocab(gen);
  add_io(gen);
  gen->add_option("--prompt-ids", o.prompt_ids, "Prompt as base ids, e.g. 1,2,1,2");
  gen->add_option("--steps", o.steps, "Generation steps")->capture_default_str();
  gen->add_option("--seed", o.seed, "Embedding seed")->capture_default_str();
  gen->add_option("--dim", o.dim, "Embedding dimension")->capture_default_str();
  gen->add_option("--format", o.format, "json|table")->check(CLI::IsMember({"json", "table"}));

  auto* vis = app.add_subcommand("visualize", "Color emitted codes by constituent count");
  add_vocab(vis);
  add_io(vis);
  vis->add_option("--format", o.format, "html|ansi")->check(CLI::IsMember({"html", "ansi"}));

  auto* bench = app.add_subcommand("bench", "Compress/decompress throughput");
  add_vocab(bench);
  add_io(bench);
  bench->add_option("--window", o.window, "Context window")->capture_default_str();
  bench->add_option("--warmup", o.warmup, "Untimed passes")->capture_default_str();
  bench->add_option("--repeats", o.repeats, "Timed passes")->capture_default_str();

  auto* pre = app.add_subcommand("precompute-codebook", "Per-sequence codes and fixed codebooks for training");
  add_vocab(pre);
  add_io(pre);
  auto* pre_window = pre->add_option("--window", o.window, "Split documents into sequences of this length");

  auto* tok = app.add_subcommand("tokenize", "UTF-8 text -> byte-fallback token JSONL");
  add_io(tok);
  tok->add_flag("--split-lines", o.split_lines, "One document per input line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  o.window_given = pre_window->count() > 0;
  if (o.window == 0) {
    std::cerr << "error: --window must be >= 1\n";
    return kExitValidation;
  }

  try {
    if (*compress) return cmd_compress(o);
    if (*decompress) return cmd_decompress(o);
    if (*stats) return cmd_stats(o);
    if (*ablate) return cmd_ablate_m(o);
    if (*gen) return cmd_generate_sim(o);
    if (*vis) return cmd_visualize(o);
    if (*bench) return cmd_bench(o);
    if (*pre) return cmd_precompute_codebook(o);
    if (*tok) return cmd_tokenize(o);
  } catch (const z2z::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == z2z::ErrorKind::InvariantViolation ? kExitInternal : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitValidation;
}
