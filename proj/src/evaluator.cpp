#include "agreebench/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <mutex>
#include <json.hpp>
#include <ostream>
#include <thread>

#include "agreebench/error.hpp"

namespace agreebench {

using json = nlohmann::json;

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kCorrect: return "correct";
    case Verdict::kIncorrect: return "incorrect";
    case Verdict::kTie: return "tie";
    case Verdict::kDiscarded: return "discarded";
  }
  return "?";
}

std::string_view to_string(GateMode m) {
  switch (m) {
    case GateMode::kWhitespace: return "whitespace";
    case GateMode::kSubword: return "subword";
    case GateMode::kBackend: return "backend";
  }
  return "?";
}

std::string_view to_string(ScoreBasis b) {
  return b == ScoreBasis::kMean ? "mean" : "sum";
}

std::string_view to_string(ScoringMode m) {
  return m == ScoringMode::kSentence ? "sentence" : "masked";
}

std::optional<GateMode> parse_gate_mode(std::string_view s) {
  for (auto m : {GateMode::kWhitespace, GateMode::kSubword, GateMode::kBackend})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

std::optional<ScoreBasis> parse_score_basis(std::string_view s) {
  for (auto b : {ScoreBasis::kMean, ScoreBasis::kSum})
    if (to_string(b) == s) return b;
  return std::nullopt;
}

std::optional<ScoringMode> parse_scoring_mode(std::string_view s) {
  for (auto m : {ScoringMode::kSentence, ScoringMode::kMasked})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

Verdict judge_pair(const std::optional<SentenceScore>& grammatical,
                   const std::optional<SentenceScore>& ungrammatical,
                   const GateResult& gate, ScoreBasis basis) {
  if (!gate.keep()) return Verdict::kDiscarded;
  if (!grammatical || !ungrammatical)
    throw ScoringError("kept pair is missing a score");
  double g = basis == ScoreBasis::kMean ? grammatical->mean_nll : grammatical->sum_nll;
  double u = basis == ScoreBasis::kMean ? ungrammatical->mean_nll
                                        : ungrammatical->sum_nll;
  if (g < u) return Verdict::kCorrect;
  if (g == u) return Verdict::kTie;
  return Verdict::kIncorrect;
}

void CategoryResult::add(Verdict v) {
  ++n_total;
  switch (v) {
    case Verdict::kCorrect: ++n_correct; break;
    case Verdict::kIncorrect: ++n_incorrect; break;
    case Verdict::kTie: ++n_tie; break;
    case Verdict::kDiscarded: ++n_discarded; break;
  }
}

std::optional<double> CategoryResult::accuracy() const {
  std::size_t denom = n_total - n_discarded;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(n_correct) / static_cast<double>(denom);
}

const CategoryResult& EvaluationReport::coarse_row(Phenomenon p) const {
  for (const auto& r : coarse)
    if (r.phenomenon == p) return r;
  throw Error("report has no row for " + std::string(id(p)));
}

std::vector<CategoryResult> EvaluationReport::fine_rows(Phenomenon p) const {
  std::vector<CategoryResult> out;
  for (const auto& r : fine)
    if (r.phenomenon == p) out.push_back(r);
  return out;
}

EvaluationReport aggregate(const std::vector<PairDecision>& decisions) {
  EvaluationReport report;
  for (auto p : kAllPhenomena) {
    CategoryResult row;
    row.phenomenon = p;
    report.coarse.push_back(row);
  }
  std::map<std::pair<Phenomenon, std::string>, CategoryResult> fine;
  for (const auto& d : decisions) {
    report.coarse[static_cast<std::size_t>(d.phenomenon)].add(d.verdict);
    auto& row = fine[{d.phenomenon, d.condition}];
    row.phenomenon = d.phenomenon;
    row.condition = d.condition;
    row.add(d.verdict);
  }
  for (auto& [key, row] : fine) report.fine.push_back(row);
  std::stable_sort(report.fine.begin(), report.fine.end(),
                   [](const CategoryResult& a, const CategoryResult& b) {
                     if (a.phenomenon != b.phenomenon) return a.phenomenon < b.phenomenon;
                     int ra = condition_rank(*a.condition), rb = condition_rank(*b.condition);
                     if (ra != rb) return ra < rb;
                     return *a.condition < *b.condition;
                   });
  return report;
}

CharSpan token_span(const std::vector<std::string>& tokens, std::size_t index) {
  if (index >= tokens.size())
    throw ScoringError("token index " + std::to_string(index) + " out of range");
  std::size_t begin = 0;
  for (std::size_t i = 0; i < index; ++i)
    begin += utf8_boundaries(tokens[i]).size() - 1 + 1;
  return {begin, begin + utf8_boundaries(tokens[index]).size() - 1};
}

namespace {

PairDecision decide_masked(const MinimalPair& pair, const ScorerBackend& backend) {
  PairDecision d;
  std::string text = join_tokens(pair.grammatical);
  auto span = token_span(pair.grammatical, pair.locus_index);
  auto r = masked_candidates(backend, text, span,
                             {pair.grammatical[pair.locus_index],
                              pair.ungrammatical[pair.locus_index]});
  d.gate.len_grammatical = r.num_subwords.size() > 0 ? r.num_subwords[0] : 1;
  d.gate.len_ungrammatical = r.num_subwords.size() > 1 ? r.num_subwords[1] : 1;
  if (!r.logprobs[0] || !r.logprobs[1]) {
    d.gate.verdict = GateResult::Verdict::kDiscard;
    d.gate.reason = "candidate split into several pieces: " +
                    std::to_string(d.gate.len_grammatical) + " vs " +
                    std::to_string(d.gate.len_ungrammatical);
    return d;
  }
  d.score_grammatical = SentenceScore::from_mean(1, -*r.logprobs[0]);
  d.score_ungrammatical = SentenceScore::from_mean(1, -*r.logprobs[1]);
  return d;
}

}  // namespace

PairDecision decide(const MinimalPair& pair, const ScorerBackend& backend,
                    const EvaluationConfig& config) {
  PairDecision d;
  if (config.mode == ScoringMode::kMasked) {
    d = decide_masked(pair, backend);
  } else {
    std::string g = join_tokens(pair.grammatical);
    std::string u = join_tokens(pair.ungrammatical);
    switch (config.gate) {
      case GateMode::kWhitespace:
        d.gate = length_gate(pair, whitespace_counter());
        break;
      case GateMode::kSubword:
        if (!config.vocab) throw ScoringError("sub-word gate needs a vocabulary");
        d.gate = length_gate(pair, subword_counter(*config.vocab));
        break;
      case GateMode::kBackend:
        break;
    }
    if (config.gate == GateMode::kBackend || d.gate.keep()) {
      d.score_grammatical = score_sentence(backend, g);
      d.score_ungrammatical = score_sentence(backend, u);
      if (config.gate == GateMode::kBackend)
        d.gate = length_gate(d.score_grammatical->num_tokens,
                             d.score_ungrammatical->num_tokens);
    }
  }
  d.pair_id = pair.id;
  d.phenomenon = pair.phenomenon;
  d.condition = pair.condition;
  d.verdict = judge_pair(d.score_grammatical, d.score_ungrammatical, d.gate,
                         config.mode == ScoringMode::kMasked ? ScoreBasis::kMean
                                                             : config.basis);
  return d;
}

std::string audit_record(const PairDecision& d) {
  json j = json::object();
  j["id"] = d.pair_id;
  j["phenomenon"] = id(d.phenomenon);
  j["condition"] = d.condition;
  j["verdict"] = to_string(d.verdict);
  auto mean = [](const std::optional<SentenceScore>& s) {
    return s ? json(s->mean_nll) : json(nullptr);
  };
  auto sum = [](const std::optional<SentenceScore>& s) {
    return s ? json(s->sum_nll) : json(nullptr);
  };
  j["mean_nll_grammatical"] = mean(d.score_grammatical);
  j["mean_nll_ungrammatical"] = mean(d.score_ungrammatical);
  j["sum_nll_grammatical"] = sum(d.score_grammatical);
  j["sum_nll_ungrammatical"] = sum(d.score_ungrammatical);
  j["margin"] = d.score_grammatical && d.score_ungrammatical
                    ? json(d.score_ungrammatical->mean_nll -
                           d.score_grammatical->mean_nll)
                    : json(nullptr);
  j["num_tokens"] = {d.gate.len_grammatical, d.gate.len_ungrammatical};
  if (!d.gate.reason.empty()) j["gate_reason"] = d.gate.reason;
  return j.dump();
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

EvaluationReport evaluate_pairs(const std::vector<MinimalPair>& pairs,
                                const ScorerBackend& backend,
                                const EvaluationConfig& config) {
  std::size_t workers = backend.concurrency_limit();
  if (config.jobs > 0) workers = std::min(workers, config.jobs);
  workers = std::max<std::size_t>(1, std::min(workers, pairs.size()));

  std::vector<std::optional<PairDecision>> decisions(pairs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex error_mu;
  std::string transport_error;
  std::exception_ptr other_error;

  auto work = [&] {
    for (;;) {
      if (stop) return;
      std::size_t i = next++;
      if (i >= pairs.size()) return;
      try {
        decisions[i] = decide(pairs[i], backend, config);
      } catch (const TransportError& e) {
        std::lock_guard lock(error_mu);
        if (transport_error.empty()) transport_error = e.what();
        stop = true;
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!other_error) other_error = std::current_exception();
        stop = true;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  if (other_error) std::rethrow_exception(other_error);

  std::vector<PairDecision> done;
  done.reserve(pairs.size());
  for (auto& d : decisions) {
    if (!d) continue;
    if (config.audit) *config.audit << audit_record(*d) << '\n';
    done.push_back(std::move(*d));
  }

  EvaluationReport report = aggregate(done);
  report.backend = backend.name();
  report.timestamp = config.timestamp.empty() ? utc_timestamp() : config.timestamp;
  report.config = config.echo;
  report.config["gate"] = to_string(config.gate);
  report.config["score_basis"] = to_string(config.basis);
  report.config["mode"] = to_string(config.mode);
  report.config["pairs_expected"] = std::to_string(pairs.size());
  report.config["pairs_decided"] = std::to_string(done.size());
  if (!transport_error.empty()) {
    report.incomplete = true;
    report.error = transport_error;
  }
  return report;
}

EvaluationReport evaluate_dataset(const PairFile& file,
                                  const ScorerBackend& backend,
                                  const EvaluationConfig& config) {
  EvaluationConfig c = config;
  c.echo.emplace("pairs_sha256", file.manifest.pairs_sha256);
  return evaluate_pairs(file.pairs, backend, c);
}

}  // namespace agreebench
