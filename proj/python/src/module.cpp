#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <stdexcept>
#include <sstream>
#include <unordered_set>

#include "agreebench/error.hpp"
#include "agreebench/evaluator.hpp"
#include "agreebench/extern_backend.hpp"
#include "agreebench/pairfile.hpp"
#include "agreebench/report.hpp"
#include "agreebench/scoring.hpp"
#include "agreebench/stats.hpp"

namespace py = pybind11;
using namespace agreebench;

namespace {

std::unique_ptr<ScorerBackend> make_backend(const std::string& name, const PairFile& file,
                                            std::uint64_t seed, int ngram_order, double ngram_k,
                                            std::size_t uniform_vocab,
                                            const std::string& extern_cmd) {
  if (name == "oracle") {
    std::unordered_set<std::string> grammatical;
    for (const auto& p : file.pairs) grammatical.insert(join_tokens(p.grammatical));
    return make_oracle_backend(std::move(grammatical));
  }
  if (name == "uniform") {
    if (uniform_vocab == 0) uniform_vocab = std::max<std::size_t>(1, corpus_stats(file.pairs).word_forms);
    return make_uniform_backend(uniform_vocab);
  }
  if (name == "random") return make_random_backend(seed);
  if (name == "ngram") {
    std::vector<std::vector<std::string>> corpus;
    std::unordered_set<std::string> seen;
    for (const auto& p : file.pairs)
      if (seen.insert(join_tokens(p.grammatical)).second) corpus.push_back(p.grammatical);
    return train_ngram(corpus, ngram_order, ngram_k);
  }
  if (name == "extern") {
    if (extern_cmd.empty()) throw std::invalid_argument("the extern backend needs extern_cmd");
    return std::make_unique<ExternBackend>(spawn_transport(extern_cmd));
  }
  throw std::invalid_argument("unknown backend '" + name + "'");
}

std::string generate(const std::string& grammar_dir, const std::string& pairs_path) {
  auto grammars = load_case_grammars(grammar_dir);
  auto pairs = generate_corpus(grammars);
  auto sources = sources_of(grammars);
  write_pairs_file(pairs_path, pairs, sources);
  auto manifest = manifest_to_json(build_manifest(pairs, sources), 2) + "\n";
  std::ofstream(pairs_path + ".manifest.json", std::ios::binary) << manifest;
  return manifest;
}

std::vector<std::string> pair_records(const std::string& grammar_dir) {
  std::vector<std::string> out;
  for (const auto& p : generate_corpus(load_case_grammars(grammar_dir))) out.push_back(pair_record(p));
  return out;
}

std::string evaluate(const std::string& pairs_path, const std::string& backend, const std::string& basis,
                     const std::string& gate, std::uint64_t seed, int ngram_order, double ngram_k,
                     std::size_t uniform_vocab, const std::string& extern_cmd, std::size_t jobs,
                     const std::string& timestamp, bool strict) {
  auto file = read_pairs_file(pairs_path, strict);
  EvaluationConfig config;
  auto b = parse_score_basis(basis);
  if (!b) throw std::invalid_argument("unknown score basis '" + basis + "'");
  auto g = parse_gate_mode(gate);
  if (!g || *g == GateMode::kSubword) throw std::invalid_argument("unsupported gate '" + gate + "'");
  config.basis = *b;
  config.gate = *g;
  config.jobs = jobs;
  config.timestamp = timestamp;
  config.echo["backend"] = backend;
  auto scorer = make_backend(backend, file, seed, ngram_order, ngram_k, uniform_vocab, extern_cmd);
  EvaluationReport report;
  {
    py::gil_scoped_release release;
    report = evaluate_dataset(file, *scorer, config);
  }
  return render_report(report, ReportFormat::kJson);
}

std::string convert_report(const std::string& text, const std::string& format) {
  auto f = parse_report_format(format);
  if (!f) throw std::invalid_argument("unknown report format '" + format + "'");
  return render_report(parse_report(text), *f);
}

std::string stats(const std::string& pairs_path, const std::string& grammar_dir) {
  auto file = read_pairs_file(pairs_path, false);
  if (grammar_dir.empty()) return stats_json(corpus_stats(file.pairs));
  auto grammars = load_case_grammars(grammar_dir);
  return stats_json(corpus_stats(file.pairs, &grammars));
}

py::tuple cross_entropy_py(const std::vector<std::vector<double>>& logits,
                           const std::vector<std::uint32_t>& targets) {
  std::size_t cols = logits.empty() ? 0 : logits.front().size();
  LogitMatrix m(logits.size(), cols);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i].size() != cols) throw ScoringError("ragged logit rows");
    for (std::size_t v = 0; v < cols; ++v) m(i, v) = logits[i][v];
  }
  auto s = cross_entropy(m, targets);
  return py::make_tuple(s.num_tokens, s.mean_nll, s.sum_nll);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of agreebench";
  m.attr("__version__") = AGREEBENCH_VERSION;

  // Translators registered later are tried first.
  py::register_exception<Error>(m, "AgreebenchError", PyExc_ValueError);
  py::register_exception<TransportError>(m, "TransportError", PyExc_ConnectionError);

  m.def("generate", &generate, py::arg("grammar_dir"), py::arg("pairs_path"),
        "Writes the pair file and its manifest; returns the manifest JSON.");
  m.def("pair_records", &pair_records, py::arg("grammar_dir"),
        "Generated pairs as JSON records, in file order.");
  m.def("evaluate", &evaluate, py::arg("pairs_path"), py::arg("backend") = "oracle",
        py::arg("basis") = "mean", py::arg("gate") = "whitespace", py::arg("seed") = 42,
        py::arg("ngram_order") = 2, py::arg("ngram_k") = 0.1, py::arg("uniform_vocab") = 0,
        py::arg("extern_cmd") = "", py::arg("jobs") = 0, py::arg("timestamp") = "",
        py::arg("strict") = true, "Scores a pair file; returns the report as JSON.");
  m.def("convert_report", &convert_report, py::arg("text"), py::arg("format"));
  m.def("stats", &stats, py::arg("pairs_path"), py::arg("grammar_dir") = "");
  m.def("cross_entropy", &cross_entropy_py, py::arg("logits"), py::arg("targets"),
        "(num_tokens, mean_nll, sum_nll) in nats.");
}
