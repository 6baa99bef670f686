#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "had/cache.hpp"
#include "had/dataset.hpp"
#include "had/discussion.hpp"
#include "had/metrics.hpp"

namespace had {

enum class PipelineMode { Naive, Had };

std::string to_string(PipelineMode mode);
std::optional<PipelineMode> mode_from_string(const std::string& name);

struct CallStats {
  long backend_calls = 0;  // completions requested by the pipeline
  long cache_hits = 0;     // of those, served from the response cache
  long records_failed = 0;
};

struct EvalReport {
  std::string dataset;
  std::string mode;  // "naive", "had", or "had-minus-<agent id>"
  LabelScheme scheme = LabelScheme::Ternary;
  std::size_t records_evaluated = 0;
  double accuracy = 0.0;
  std::map<std::string, double> per_class_f1;
  double macro_f1 = 0.0;
  double positive_f1 = 0.0;
  /// Macro F1 for ternary runs, positive-class F1 for binary runs.
  double headline_f1 = 0.0;
  ConfusionMatrix confusion;
  CallStats calls;
  double wall_ms = 0.0;
  std::string config_hash;
  bool complete = true;
};

nlohmann::json report_to_json(const EvalReport& report);
std::string report_table(const EvalReport& report);
/// One-line summary, percentages: "<dataset>  <mode>  Acc. <x>  F-1 <y>".
std::string report_summary_row(const EvalReport& report);

struct EvalOptions {
  PipelineMode mode = PipelineMode::Had;
  DiscussionConfig discussion;
  /// JSON-lines transcript sink; empty disables persistence. Existing
  /// records in the file are not re-run (resume).
  std::filesystem::path transcript_path;
  int record_parallelism = 1;
  int max_consecutive_failures = 5;
  std::string config_hash;
};

/// Runs the selected pipeline over every record, accumulating a confusion
/// matrix and persisting transcripts as it goes. Aborts once
/// `max_consecutive_failures` records fail back to back; the partial report
/// is marked incomplete.
EvalReport evaluate(const Dataset& dataset, const std::vector<AgentSpec>& roster,
                    Backend& backend, const EvalOptions& options);

struct AblationRow {
  std::string label;  // "naive", "w/o A1", ...
  double accuracy_delta = 0.0;
  double headline_f1_delta = 0.0;
};

/// Full run plus one leave-one-out run per enabled agent, and the naive
/// baseline. Deltas are signed removed-minus-full.
struct AblationReport {
  EvalReport baseline;
  EvalReport naive;
  std::vector<std::pair<std::string, EvalReport>> leave_one_out;

  std::vector<AblationRow> rows() const;
};

/// Requires at least two enabled agents (throws std::invalid_argument
/// otherwise). Each leave-one-out evaluation reuses the shared per-agent
/// completions through the response cache.
AblationReport run_ablation(const Dataset& dataset, const std::vector<AgentSpec>& roster,
                            Backend& backend, const EvalOptions& options);

std::string ablation_table(const AblationReport& report);
nlohmann::json ablation_to_json(const AblationReport& report);

/// Human-readable case block: message, per-agent opinions "(A1) ...",
/// failures, summative text and the final label.
std::string emit_case_report(const DiscussionTranscript& transcript);

}  // namespace had
