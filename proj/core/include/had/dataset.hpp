#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "had/types.hpp"

namespace had {

enum class DatasetName { FPB, StockSen, CMC, FiQA, SEntFiN };

std::string to_string(DatasetName name);
std::optional<DatasetName> dataset_from_string(const std::string& name);

/// FPB and SEntFiN are ternary; StockSen, CMC and FiQA are binary once
/// post-processed.
LabelScheme scheme_for(DatasetName name);

struct LabeledRecord {
  std::string id;
  std::string text;
  SentimentLabel gold = SentimentLabel::Neutral;
  std::optional<double> score;  // present for score-bearing corpora (FiQA)
  std::optional<std::string> target;
  std::string source;
};

struct Dataset {
  DatasetName name = DatasetName::FPB;
  LabelScheme scheme = LabelScheme::Ternary;
  std::vector<LabeledRecord> records;
};

enum class FileFormat { Csv, JsonLines };

/// How raw corpus files map onto LabeledRecord fields. Column references are
/// header names, or 0-based indices rendered as digits for headerless files.
/// `label` may be empty for score-only corpora. `entity_policy` governs
/// label cells that hold an entity->sentiment map (SEntFiN): keep records
/// whose map is single-valued or unanimous (the default), keep the first
/// entity's label, or drop every multi-entity record.
struct ColumnMap {
  FileFormat format = FileFormat::Csv;
  char delimiter = ',';
  bool has_header = true;
  std::string text = "text";
  std::string label = "label";
  std::string score;
  std::string target;
  std::string id;

  enum class EntityPolicy { Unanimous, First, DropMulti };
  EntityPolicy entity_policy = EntityPolicy::Unanimous;
};

/// Column maps for the published file formats of the five corpora.
ColumnMap default_column_map(DatasetName name);

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingColumnError : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

class EmptyDatasetError : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

class UnmappableLabelError : public DatasetError {
 public:
  UnmappableLabelError(std::size_t row, const std::string& value)
      : DatasetError("row " + std::to_string(row) + ": unmappable label '" + value +
                     "'"),
        row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

struct RecordIssue {
  std::size_t row = 0;  // 1-based data row
  std::string reason;
};

/// Loads and normalizes one corpus file. Label strings map case-insensitively
/// ({positive, bullish} -> Positive, {negative, bearish} -> Negative,
/// {neutral} -> Neutral). When `issues` is given, bad records are skipped and
/// reported there; otherwise the first one throws UnmappableLabelError.
/// Throws MissingColumnError / EmptyDatasetError as appropriate.
Dataset load_dataset(DatasetName name, const std::filesystem::path& path,
                     const ColumnMap& columns,
                     std::vector<RecordIssue>* issues = nullptr);

/// Keeps records whose |score| strictly exceeds `threshold` and assigns
/// Positive when score > 0, Negative otherwise. Throws DatasetError on a
/// record without a score.
Dataset quantize_fiqa(const Dataset& dataset, double threshold = 0.3);

struct LabelCounts {
  long positive = 0;
  long negative = 0;
  long neutral = 0;
  long total() const { return positive + negative + neutral; }
};

LabelCounts count_labels(const Dataset& dataset);

/// Published post-processing statistics the loaders are validated against.
LabelCounts expected_stats(DatasetName name);

struct StatsRow {
  std::string label;
  long expected = 0;
  long actual = 0;
  long delta() const { return actual - expected; }
};

struct StatsReport {
  DatasetName dataset = DatasetName::FPB;
  std::vector<StatsRow> rows;
  bool pass = false;
};

StatsReport validate_stats(const Dataset& dataset);
std::string stats_table(const StatsReport& report);

/// Normalized JSON-lines snapshot of a post-processed dataset, one record
/// per line, for exact reproducibility.
void write_snapshot(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_snapshot(DatasetName name, const std::filesystem::path& path);

}  // namespace had
