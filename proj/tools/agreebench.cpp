#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "agreebench/checksum.hpp"
#include "agreebench/error.hpp"
#include "agreebench/evaluator.hpp"
#include "agreebench/extern_backend.hpp"
#include "agreebench/pairfile.hpp"
#include "agreebench/pairgen.hpp"
#include "agreebench/report.hpp"
#include "agreebench/stats.hpp"

namespace fs = std::filesystem;
using namespace agreebench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiagnostics = 1;
constexpr int kExitUsage = 2;
constexpr int kExitTransport = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string grammar_dir = "grammars";
  std::string pairs = "pairs.jsonl";

  std::string manifest;
  std::string out;

  std::string backend = "oracle";
  std::string extern_cmd;
  std::string extern_addr;
  std::string gate = "whitespace";
  std::string vocab;
  std::string mode = "sentence";
  std::string basis = "mean";
  std::size_t jobs = 0;
  std::uint64_t seed = 42;
  int ngram_order = 2;
  double ngram_k = 0.1;
  std::string ngram_train;
  std::size_t uniform_vocab = 0;
  std::string audit;
  bool strict = true;
  std::string timestamp;

  std::string report_in;
  std::string format;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_validate(const Options& o) {
  std::vector<fs::path> files;
  if (!fs::is_directory(o.grammar_dir))
    throw UsageError("grammar directory " + o.grammar_dir + " does not exist");
  for (const auto& e : fs::directory_iterator(o.grammar_dir))
    if (e.is_regular_file() && e.path().extension() == ".cfg") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::size_t problems = 0;
  auto report = [&](const fs::path& f, std::string_view kind, const std::string& msg) {
    std::cerr << "agreebench: " << f.filename().string() << ": " << kind << ": "
              << msg << "\n";
    ++problems;
  };
  for (const auto& f : files) {
    try {
      auto g = std::make_shared<const Grammar>(load_grammar(f));
      auto diags = validate_grammar(*g);
      for (const auto& d : diags) report(f, to_string(d.kind), d.message);
      if (!diags.empty()) continue;
      auto spec = make_case_spec(g);
      auto pairs = generate_pairs(spec);
      std::cout << f.filename().string() << ": ok, " << id(spec.phenomenon) << ", "
                << pairs.size() << " pairs\n";
    } catch (const ParseError& e) {
      report(f, "parse", e.what());
    } catch (const Error& e) {
      report(f, "case", e.what());
    }
  }
  if (files.empty()) report(o.grammar_dir, "empty", "no .cfg files");

  if (!o.manifest.empty() && problems == 0) {
    auto grammars = load_case_grammars(o.grammar_dir);
    auto pairs = generate_corpus(grammars);
    auto diffs = compare_manifests(load_manifest(o.manifest),
                                   build_manifest(pairs, sources_of(grammars)));
    for (const auto& d : diffs) report(o.manifest, "manifest", d);
    if (diffs.empty()) std::cout << o.manifest << ": matches\n";
  }
  return problems == 0 ? kExitOk : kExitDiagnostics;
}

int run_generate(const Options& o) {
  auto grammars = load_case_grammars(o.grammar_dir);
  auto pairs = generate_corpus(grammars);
  auto sources = sources_of(grammars);
  std::string out = o.out.empty() ? o.pairs : o.out;
  write_pairs_file(out, pairs, sources);
  auto manifest = build_manifest(pairs, sources);
  std::string manifest_path = o.manifest.empty() ? out + ".manifest.json" : o.manifest;
  write_text(manifest_path, manifest_to_json(manifest, 2) + "\n");
  std::cerr << "agreebench: wrote " << pairs.size() << " pairs to " << out
            << " and manifest " << manifest_path << "\n";
  return kExitOk;
}

std::unique_ptr<ScorerBackend> make_backend(const Options& o, const PairFile& file) {
  if (o.backend == "oracle") {
    std::unordered_set<std::string> grammatical;
    for (const auto& p : file.pairs) grammatical.insert(join_tokens(p.grammatical));
    return make_oracle_backend(std::move(grammatical));
  }
  if (o.backend == "uniform") {
    std::size_t v = o.uniform_vocab;
    if (v == 0) v = std::max<std::size_t>(1, corpus_stats(file.pairs).word_forms);
    return make_uniform_backend(v);
  }
  if (o.backend == "random") return make_random_backend(o.seed);
  if (o.backend == "ngram") {
    PairFile train_file;
    const PairFile* train = &file;
    if (!o.ngram_train.empty()) {
      train_file = read_pairs_file(o.ngram_train, false);
      train = &train_file;
    }
    std::vector<std::vector<std::string>> corpus;
    std::unordered_set<std::string> seen;
    for (const auto& p : train->pairs)
      if (seen.insert(join_tokens(p.grammatical)).second) corpus.push_back(p.grammatical);
    if (corpus.empty()) throw UsageError("n-gram backend needs a non-empty training corpus");
    return train_ngram(corpus, o.ngram_order, o.ngram_k);
  }
  if (o.backend == "extern") {
    if (o.extern_cmd.empty() == o.extern_addr.empty())
      throw UsageError("--backend extern needs exactly one of --extern-cmd and --extern-addr");
    auto transport = o.extern_cmd.empty() ? connect_transport(o.extern_addr)
                                          : spawn_transport(o.extern_cmd);
    std::optional<std::size_t> cap;
    if (o.jobs > 0) cap = o.jobs;
    return std::make_unique<ExternBackend>(std::move(transport), cap);
  }
  throw UsageError("unknown backend '" + o.backend + "'");
}

int run_evaluate(const Options& o) {
  auto gate = parse_gate_mode(o.gate);
  if (!gate) throw UsageError("unknown gate '" + o.gate + "'");
  auto basis = parse_score_basis(o.basis);
  if (!basis) throw UsageError("unknown score basis '" + o.basis + "'");
  auto mode = parse_scoring_mode(o.mode);
  if (!mode) throw UsageError("unknown mode '" + o.mode + "'");
  std::optional<SubwordVocab> vocab;
  if (*gate == GateMode::kSubword) {
    if (o.vocab.empty()) throw UsageError("--gate subword needs --vocab");
    vocab = SubwordVocab::load(o.vocab);
  }

  auto file = read_pairs_file(o.pairs, o.strict);
  auto backend = make_backend(o, file);

  std::ofstream audit;
  EvaluationConfig config;
  config.gate = *gate;
  config.vocab = vocab ? &*vocab : nullptr;
  config.basis = *basis;
  config.mode = *mode;
  config.jobs = o.jobs;
  config.timestamp = o.timestamp;
  if (!o.audit.empty()) {
    audit.open(o.audit, std::ios::binary);
    if (!audit) throw Error("cannot write " + o.audit);
    config.audit = &audit;
  }
  config.echo["backend"] = o.backend;
  config.echo["pairs_file"] = fs::path(o.pairs).filename().string();
  config.echo["tool_version"] = AGREEBENCH_VERSION;
  if (o.backend == "random") config.echo["seed"] = std::to_string(o.seed);
  if (o.backend == "ngram") {
    config.echo["ngram_order"] = std::to_string(o.ngram_order);
    config.echo["ngram_k"] = CLI::detail::to_string(o.ngram_k);
    if (!o.ngram_train.empty())
      config.echo["ngram_train_sha256"] = sha256_file(o.ngram_train);
  }
  if (o.backend == "uniform") config.echo["vocab_size"] = std::to_string(backend->vocab_size());
  if (o.backend == "extern") {
    config.echo["extern"] = o.extern_cmd.empty() ? o.extern_addr : o.extern_cmd;
    config.echo["extern_name"] = backend->name();
  }
  if (vocab) config.echo["vocab_sha256"] = sha256_file(o.vocab);

  auto report = evaluate_dataset(file, *backend, config);
  if (auto* ext = dynamic_cast<ExternBackend*>(backend.get())) ext->shutdown();
  auto format = o.format.empty() ? ReportFormat::kJson : parse_report_format(o.format);
  if (!format) throw UsageError("unknown format '" + o.format + "'");
  write_text(o.out, render_report(report, *format));
  if (report.incomplete) {
    std::cerr << "agreebench: transport: " << report.error << " (report incomplete)\n";
    return kExitTransport;
  }
  return kExitOk;
}

int run_report(const Options& o) {
  auto format = o.format.empty() ? ReportFormat::kMarkdown : parse_report_format(o.format);
  if (!format) throw UsageError("unknown format '" + o.format + "'");
  auto report = parse_report(read_text(o.report_in));
  write_text(o.out, render_report(report, *format));
  return kExitOk;
}

int run_stats(const Options& o) {
  auto file = read_pairs_file(o.pairs, false);
  std::optional<std::vector<CaseGrammar>> grammars;
  if (fs::is_directory(o.grammar_dir)) grammars = load_case_grammars(o.grammar_dir);
  auto stats = corpus_stats(file.pairs, grammars ? &*grammars : nullptr);
  if (o.format.empty() || o.format == "text")
    write_text(o.out, render_stats(stats));
  else if (o.format == "json")
    write_text(o.out, stats_json(stats));
  else
    throw UsageError("unknown format '" + o.format + "'");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate German agreement minimal pairs and evaluate scorers on them"};
  app.set_version_flag("--version", AGREEBENCH_VERSION);
  app.require_subcommand(1);
  Options o;

  auto grammar_opt = [&](CLI::App* c) {
    c->add_option("--grammar-dir", o.grammar_dir, "Directory of .cfg grammars")
        ->envname("AGREEBENCH_GRAMMAR_DIR")
        ->capture_default_str();
  };
  auto pairs_opt = [&](CLI::App* c) {
    c->add_option("--pairs", o.pairs, "Pair file (JSONL)")
        ->envname("AGREEBENCH_PAIRS")
        ->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check grammars for errors");
  grammar_opt(validate);
  validate->add_option("--manifest", o.manifest,
                       "Also compare generated counts against this manifest");

  auto* generate = app.add_subcommand("generate", "Write the pair file and manifest");
  grammar_opt(generate);
  pairs_opt(generate);
  generate->add_option("--out,-o", o.out, "Pair file to write (default: --pairs)");
  generate->add_option("--manifest", o.manifest,
                       "Manifest to write (default: <pairs>.manifest.json)");

  auto* evaluate = app.add_subcommand("evaluate", "Score every pair with a backend");
  pairs_opt(evaluate);
  evaluate->add_option("--backend", o.backend, "oracle, uniform, random, ngram or extern")
      ->envname("AGREEBENCH_BACKEND")
      ->check(CLI::IsMember({"oracle", "uniform", "random", "ngram", "extern"}))
      ->capture_default_str();
  evaluate->add_option("--extern-cmd", o.extern_cmd, "Command that starts an external scorer")
      ->envname("AGREEBENCH_EXTERN_CMD");
  evaluate->add_option("--extern-addr", o.extern_addr, "host:port or unix:/path of a scorer")
      ->envname("AGREEBENCH_EXTERN_ADDR");
  evaluate->add_option("--gate", o.gate, "whitespace, subword or backend")
      ->envname("AGREEBENCH_GATE")
      ->capture_default_str();
  evaluate->add_option("--vocab", o.vocab, "Sub-word vocabulary for --gate subword")
      ->envname("AGREEBENCH_VOCAB");
  evaluate->add_option("--mode", o.mode, "sentence or masked")->capture_default_str();
  evaluate->add_option("--basis", o.basis, "Compare by mean or sum")->capture_default_str();
  evaluate->add_option("--jobs,-j", o.jobs, "Cap on concurrent scoring requests (0: backend limit)")
      ->envname("AGREEBENCH_JOBS");
  evaluate->add_option("--seed", o.seed, "Seed of the random backend")
      ->envname("AGREEBENCH_SEED")
      ->capture_default_str();
  evaluate->add_option("--ngram-order", o.ngram_order, "2 or 3")->capture_default_str();
  evaluate->add_option("--ngram-k", o.ngram_k, "Add-k smoothing constant")->capture_default_str();
  evaluate->add_option("--ngram-train", o.ngram_train,
                       "Pair file whose grammatical sentences train the n-gram model "
                       "(default: --pairs)");
  evaluate->add_option("--uniform-vocab", o.uniform_vocab,
                       "Vocabulary size of the uniform backend (default: corpus word forms)");
  evaluate->add_option("--audit", o.audit, "Per-pair decision log (JSONL)");
  evaluate->add_flag("--strict,!--no-strict", o.strict, "Validate the pair file first")
      ->capture_default_str();
  evaluate->add_option("--format", o.format, "json, tsv or markdown (default json)");
  evaluate->add_option("--out,-o", o.out, "Report file (default: stdout)");
  evaluate->add_option("--timestamp", o.timestamp, "Fixed report timestamp");

  auto* report = app.add_subcommand("report", "Render a saved report");
  report->add_option("report", o.report_in, "Report in json or tsv")->required();
  report->add_option("--format", o.format, "json, tsv or markdown (default markdown)");
  report->add_option("--out,-o", o.out, "Output file (default: stdout)");

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  pairs_opt(stats);
  grammar_opt(stats);
  stats->add_option("--format", o.format, "text or json (default text)");
  stats->add_option("--out,-o", o.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "agreebench: usage: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*validate) return run_validate(o);
    if (*generate) return run_generate(o);
    if (*evaluate) return run_evaluate(o);
    if (*report) return run_report(o);
    if (*stats) return run_stats(o);
  } catch (const UsageError& e) {
    std::cerr << "agreebench: usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TransportError& e) {
    std::cerr << "agreebench: transport: " << e.what() << "\n";
    return kExitTransport;
  } catch (const std::exception& e) {
    std::cerr << "agreebench: error: " << e.what() << "\n";
    return kExitDiagnostics;
  }
  return kExitUsage;
}
