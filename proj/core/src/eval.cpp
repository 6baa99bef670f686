#include "had/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace had {

std::string to_string(PipelineMode mode) {
  return mode == PipelineMode::Naive ? "naive" : "had";
}

std::optional<PipelineMode> mode_from_string(const std::string& name) {
  if (name == "naive") return PipelineMode::Naive;
  if (name == "had") return PipelineMode::Had;
  return std::nullopt;
}

namespace {

double percent(double value) { return value * 100.0; }

std::string format_percent(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", percent(value));
  return buffer;
}

std::string format_signed_percent(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%+.2f", percent(value));
  return buffer;
}

void fill_metrics(EvalReport& report) {
  report.accuracy = accuracy(report.confusion);
  report.macro_f1 = macro_f1(report.confusion);
  for (SentimentLabel label : report.confusion.labels()) {
    report.per_class_f1[to_string(label)] = f1(report.confusion, label);
  }
  report.positive_f1 = f1(report.confusion, SentimentLabel::Positive);
  report.headline_f1 =
      report.scheme == LabelScheme::Ternary ? report.macro_f1 : report.positive_f1;
}

struct RecordOutcome {
  bool failed = false;
  SentimentLabel predicted = SentimentLabel::Neutral;
  std::string transcript_line;
  long calls = 0;
  std::string error;
};

RecordOutcome run_record(const LabeledRecord& record,
                         const std::vector<AgentSpec>& roster, Backend& backend,
                         const EvalOptions& options) {
  RecordOutcome outcome;
  const Message message{record.id, record.text, record.target};
  try {
    if (options.mode == PipelineMode::Naive) {
      CountingBackend counter(std::shared_ptr<Backend>(&backend, [](Backend*) {}));
      const NaiveResult result = run_naive(message, counter, options.discussion);
      outcome.predicted = result.prediction.label;
      outcome.calls = counter.calls();
      DiscussionTranscript transcript;
      transcript.message = message;
      transcript.final = result.prediction;
      transcript.call_count = static_cast<int>(counter.calls());
      outcome.transcript_line = transcript_to_json(transcript, record.gold).dump();
    } else {
      DiscussionTranscript transcript =
          run_had(message, roster, backend, options.discussion);
      outcome.predicted = transcript.final.label;
      outcome.calls = transcript.call_count;
      outcome.transcript_line = transcript_to_json(transcript, record.gold).dump();
    }
  } catch (const std::exception& ex) {
    outcome.failed = true;
    outcome.error = ex.what();
  }
  return outcome;
}

std::unordered_map<std::string, SentimentLabel> load_prior_transcripts(
    const std::filesystem::path& path) {
  std::unordered_map<std::string, SentimentLabel> finals;
  if (path.empty()) return finals;
  std::ifstream in(path);
  if (!in) return finals;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      const TranscriptRecord record = transcript_from_json(nlohmann::json::parse(line));
      finals.emplace(record.transcript.message.id, record.transcript.final.label);
    } catch (const std::exception&) {
      // Half-written trailing line after an interrupt; re-run that record.
    }
  }
  return finals;
}

}  // namespace

EvalReport evaluate(const Dataset& dataset, const std::vector<AgentSpec>& roster,
                    Backend& backend, const EvalOptions& options) {
  if (dataset.records.empty()) throw EmptyDatasetError("evaluate: empty dataset");
  const auto started = std::chrono::steady_clock::now();

  EvalReport report;
  report.dataset = to_string(dataset.name);
  report.mode = to_string(options.mode);
  report.scheme = dataset.scheme;
  report.confusion = ConfusionMatrix(dataset.scheme);
  report.config_hash = options.config_hash;

  const auto prior = load_prior_transcripts(options.transcript_path);

  std::ofstream transcript_out;
  if (!options.transcript_path.empty()) {
    if (options.transcript_path.has_parent_path()) {
      std::filesystem::create_directories(options.transcript_path.parent_path());
    }
    transcript_out.open(options.transcript_path, std::ios::app);
    if (!transcript_out) {
      throw DatasetError("cannot open transcript file " +
                         options.transcript_path.string());
    }
  }

  // Shared per-run counter; cache hits are reported as a delta so reused
  // backends (ablation) get per-run numbers.
  auto counted = std::make_shared<CountingBackend>(
      std::shared_ptr<Backend>(&backend, [](Backend*) {}));
  long hits_before = 0;
  if (auto* caching = dynamic_cast<CachingBackend*>(&backend)) {
    hits_before = caching->stats().hits;
  }

  const std::size_t parallelism =
      static_cast<std::size_t>(std::max(options.record_parallelism, 1));
  int consecutive_failures = 0;
  bool aborted = false;

  for (std::size_t begin = 0; begin < dataset.records.size() && !aborted;
       begin += parallelism) {
    const std::size_t end = std::min(begin + parallelism, dataset.records.size());

    std::vector<std::future<RecordOutcome>> chunk;
    std::vector<const LabeledRecord*> chunk_records;
    for (std::size_t i = begin; i < end; ++i) {
      const LabeledRecord& record = dataset.records[i];
      if (prior.contains(record.id)) continue;  // resumed
      chunk_records.push_back(&record);
      chunk.push_back(std::async(std::launch::async, [&, record]() {
        return run_record(record, roster, *counted, options);
      }));
    }

    // Commit in dataset order; the transcript file stays deterministic and
    // the failure budget counts contiguous records.
    std::size_t chunk_index = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const LabeledRecord& record = dataset.records[i];
      if (auto it = prior.find(record.id); it != prior.end()) {
        report.confusion.add(record.gold, it->second);
        ++report.records_evaluated;
        consecutive_failures = 0;
        continue;
      }
      RecordOutcome outcome = chunk[chunk_index++].get();
      if (outcome.failed) {
        ++report.calls.records_failed;
        if (++consecutive_failures >= options.max_consecutive_failures) {
          aborted = true;
          break;
        }
        continue;
      }
      consecutive_failures = 0;
      report.confusion.add(record.gold, outcome.predicted);
      ++report.records_evaluated;
      if (transcript_out.is_open()) {
        transcript_out << outcome.transcript_line << "\n";
        transcript_out.flush();
      }
    }
  }

  report.calls.backend_calls = counted->calls();
  if (auto* caching = dynamic_cast<CachingBackend*>(&backend)) {
    report.calls.cache_hits = caching->stats().hits - hits_before;
  }
  report.complete = !aborted;
  if (report.confusion.total() > 0) fill_metrics(report);
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  return report;
}

AblationReport run_ablation(const Dataset& dataset, const std::vector<AgentSpec>& roster,
                            Backend& backend, const EvalOptions& options) {
  std::vector<std::string> enabled_ids;
  for (const AgentSpec& agent : roster) {
    if (agent.enabled) enabled_ids.push_back(agent.id);
  }
  if (enabled_ids.size() < 2) {
    throw std::invalid_argument("ablation needs at least two enabled agents");
  }

  AblationReport report;

  const auto run_with = [&](PipelineMode mode, const std::vector<AgentSpec>& agents,
                            const std::string& label) {
    EvalOptions run_options = options;
    run_options.mode = mode;
    if (!options.transcript_path.empty()) {
      auto path = options.transcript_path;
      path.replace_extension();
      run_options.transcript_path = path.string() + "_" + label + ".jsonl";
    }
    EvalReport result = evaluate(dataset, agents, backend, run_options);
    if (label != "naive" && label != "full") result.mode = "had-minus-" + label;
    return result;
  };

  report.baseline = run_with(PipelineMode::Had, roster, "full");
  report.naive = run_with(PipelineMode::Naive, roster, "naive");

  for (const std::string& removed : enabled_ids) {
    std::vector<AgentSpec> reduced = roster;
    for (AgentSpec& agent : reduced) {
      if (agent.id == removed) agent.enabled = false;
    }
    report.leave_one_out.emplace_back(removed,
                                      run_with(PipelineMode::Had, reduced, removed));
  }
  return report;
}

std::vector<AblationRow> AblationReport::rows() const {
  std::vector<AblationRow> rows;
  rows.push_back({"naive", naive.accuracy - baseline.accuracy,
                  naive.headline_f1 - baseline.headline_f1});
  for (const auto& [agent_id, result] : leave_one_out) {
    rows.push_back({"w/o " + agent_id, result.accuracy - baseline.accuracy,
                    result.headline_f1 - baseline.headline_f1});
  }
  return rows;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json confusion_matrix = nlohmann::json::array();
  nlohmann::json label_names = nlohmann::json::array();
  for (SentimentLabel gold : report.confusion.labels()) {
    label_names.push_back(to_string(gold));
    nlohmann::json row = nlohmann::json::array();
    for (SentimentLabel predicted : report.confusion.labels()) {
      row.push_back(report.confusion.count(gold, predicted));
    }
    confusion_matrix.push_back(row);
  }
  return {
      {"dataset", report.dataset},
      {"mode", report.mode},
      {"scheme", to_string(report.scheme)},
      {"records_evaluated", report.records_evaluated},
      {"accuracy", report.accuracy},
      {"f1",
       {{"per_class", report.per_class_f1},
        {"macro", report.macro_f1},
        {"positive", report.positive_f1},
        {"headline", report.headline_f1}}},
      {"confusion", {{"labels", label_names}, {"matrix", confusion_matrix}}},
      {"calls",
       {{"backend_calls", report.calls.backend_calls},
        {"cache_hits", report.calls.cache_hits},
        {"records_failed", report.calls.records_failed}}},
      {"timing", {{"wall_ms", report.wall_ms}}},
      {"config_hash", report.config_hash},
      {"complete", report.complete},
  };
}

std::string report_summary_row(const EvalReport& report) {
  std::ostringstream out;
  out << report.dataset << "  " << report.mode << "  Acc. "
      << format_percent(report.accuracy) << "  F-1 "
      << format_percent(report.headline_f1);
  return out.str();
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  out << "dataset: " << report.dataset << "  mode: " << report.mode
      << "  scheme: " << to_string(report.scheme) << "\n";
  out << "records: " << report.records_evaluated;
  if (report.calls.records_failed > 0) {
    out << " (" << report.calls.records_failed << " failed)";
  }
  if (!report.complete) out << "  [INCOMPLETE]";
  out << "\n";
  out << "accuracy: " << format_percent(report.accuracy)
      << "  headline F-1: " << format_percent(report.headline_f1) << "\n";
  out << "macro F-1: " << format_percent(report.macro_f1) << "  per-class:";
  for (const auto& [label, value] : report.per_class_f1) {
    out << " " << label << "=" << format_percent(value);
  }
  out << "\n";
  out << "confusion (gold rows, predicted columns):\n";
  out << "            ";
  for (SentimentLabel predicted : report.confusion.labels()) {
    char cell[32];
    std::snprintf(cell, sizeof(cell), "%10s", to_string(predicted).c_str());
    out << cell;
  }
  out << "\n";
  for (SentimentLabel gold : report.confusion.labels()) {
    char head[32];
    std::snprintf(head, sizeof(head), "%-12s", to_string(gold).c_str());
    out << head;
    for (SentimentLabel predicted : report.confusion.labels()) {
      char cell[32];
      std::snprintf(cell, sizeof(cell), "%10ld", report.confusion.count(gold, predicted));
      out << cell;
    }
    out << "\n";
  }
  out << "backend calls: " << report.calls.backend_calls
      << "  cache hits: " << report.calls.cache_hits << "\n";
  return out.str();
}

std::string ablation_table(const AblationReport& report) {
  std::ostringstream out;
  out << "run            Acc.      F-1\n";
  char line[96];
  std::snprintf(line, sizeof(line), "%-12s %8s %8s\n", "full",
                format_percent(report.baseline.accuracy).c_str(),
                format_percent(report.baseline.headline_f1).c_str());
  out << line;
  for (const AblationRow& row : report.rows()) {
    std::snprintf(line, sizeof(line), "%-12s %8s %8s\n", row.label.c_str(),
                  format_signed_percent(row.accuracy_delta).c_str(),
                  format_signed_percent(row.headline_f1_delta).c_str());
    out << line;
  }
  return out.str();
}

nlohmann::json ablation_to_json(const AblationReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const AblationRow& row : report.rows()) {
    rows.push_back({{"label", row.label},
                    {"accuracy_delta", row.accuracy_delta},
                    {"headline_f1_delta", row.headline_f1_delta}});
  }
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& [agent_id, result] : report.leave_one_out) {
    runs.push_back({{"removed", agent_id}, {"report", report_to_json(result)}});
  }
  return {{"baseline", report_to_json(report.baseline)},
          {"naive", report_to_json(report.naive)},
          {"leave_one_out", runs},
          {"rows", rows}};
}

std::string emit_case_report(const DiscussionTranscript& transcript) {
  std::ostringstream out;
  out << "=== " << transcript.message.id << " ===\n";
  out << "Message: " << transcript.message.text << "\n";
  for (const AgentOpinion& opinion : transcript.opinions) {
    out << "(" << opinion.agent_id;
    if (opinion.round > 1) out << ", r" << opinion.round;
    out << ") " << opinion.text << "\n";
  }
  for (const AgentFailure& failure : transcript.failures) {
    out << "(" << failure.agent_id;
    if (failure.round > 1) out << ", r" << failure.round;
    out << ") [no response: " << failure.error << "]\n";
  }
  if (transcript.summative_text) {
    out << "Summary: " << *transcript.summative_text << "\n";
  }
  out << "Final: " << to_string(transcript.final.label) << " ("
      << to_string(transcript.final.source) << ", " << transcript.call_count
      << " calls)\n";
  return out.str();
}

}  // namespace had
