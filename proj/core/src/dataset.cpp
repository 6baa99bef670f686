#include "had/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace had {

std::string to_string(DatasetName name) {
  switch (name) {
    case DatasetName::FPB: return "fpb";
    case DatasetName::StockSen: return "stocksen";
    case DatasetName::CMC: return "cmc";
    case DatasetName::FiQA: return "fiqa";
    case DatasetName::SEntFiN: return "sentfin";
  }
  return "unknown";
}

std::optional<DatasetName> dataset_from_string(const std::string& name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (n == "fpb") return DatasetName::FPB;
  if (n == "stocksen") return DatasetName::StockSen;
  if (n == "cmc") return DatasetName::CMC;
  if (n == "fiqa") return DatasetName::FiQA;
  if (n == "sentfin") return DatasetName::SEntFiN;
  return std::nullopt;
}

LabelScheme scheme_for(DatasetName name) {
  switch (name) {
    case DatasetName::FPB:
    case DatasetName::SEntFiN:
      return LabelScheme::Ternary;
    default:
      return LabelScheme::Binary;
  }
}

ColumnMap default_column_map(DatasetName name) {
  ColumnMap map;
  switch (name) {
    case DatasetName::FPB:
      // Sentences_*.txt: "<sentence>@<label>", no header.
      map.delimiter = '@';
      map.has_header = false;
      map.text = "0";
      map.label = "1";
      break;
    case DatasetName::StockSen:
    case DatasetName::CMC:
      map.text = "text";
      map.label = "label";
      break;
    case DatasetName::FiQA:
      map.format = FileFormat::JsonLines;
      map.text = "sentence";
      map.label.clear();
      map.score = "score";
      map.target = "target";
      break;
    case DatasetName::SEntFiN:
      map.id = "S No.";
      map.text = "Title";
      map.label = "Decisions";
      break;
  }
  return map;
}

namespace {

std::string lowered(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<SentimentLabel> map_label_word(const std::string& raw) {
  const std::string word = lowered(trim(raw));
  if (word == "positive" || word == "bullish") return SentimentLabel::Positive;
  if (word == "negative" || word == "bearish") return SentimentLabel::Negative;
  if (word == "neutral") return SentimentLabel::Neutral;
  return std::nullopt;
}

// RFC4180-style reader with a configurable delimiter: quoted cells may hold
// the delimiter, doubled quotes and newlines.
std::vector<std::vector<std::string>> read_delimited(std::istream& in, char delimiter) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;

  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cell.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"' && cell.empty()) {
      quoted = true;
    } else if (c == delimiter) {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      row.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(row));
      row.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (!cell.empty() || !row.empty()) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  if (!any) rows.clear();
  return rows;
}

// Entity->sentiment maps arrive as JSON or near-JSON ("{'X': 'neutral'}").
std::optional<std::map<std::string, std::string>> parse_entity_map(
    const std::string& cell) {
  const auto try_parse =
      [](const std::string& text) -> std::optional<std::map<std::string, std::string>> {
    try {
      const auto doc = nlohmann::json::parse(text);
      if (!doc.is_object()) return std::nullopt;
      std::map<std::string, std::string> out;
      for (const auto& [key, value] : doc.items()) {
        if (!value.is_string()) return std::nullopt;
        out[key] = value.get<std::string>();
      }
      return out;
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  };
  if (auto parsed = try_parse(cell)) return parsed;
  std::string rewritten(cell);
  std::replace(rewritten.begin(), rewritten.end(), '\'', '"');
  return try_parse(rewritten);
}

struct LabelCell {
  std::optional<SentimentLabel> label;
  std::optional<std::string> target;
  bool drop = false;  // filtered out (multi-entity disagreement), not an error
};

LabelCell resolve_label_cell(const std::string& cell, ColumnMap::EntityPolicy policy) {
  LabelCell out;
  const std::string trimmed = trim(cell);
  if (!trimmed.empty() && trimmed.front() == '{') {
    const auto entities = parse_entity_map(trimmed);
    if (!entities || entities->empty()) return out;  // unmappable
    if (entities->size() > 1 && policy == ColumnMap::EntityPolicy::DropMulti) {
      out.drop = true;
      return out;
    }
    std::optional<SentimentLabel> agreed;
    for (const auto& [entity, word] : *entities) {
      const auto label = map_label_word(word);
      if (!label) return out;  // unmappable word inside the map
      if (policy == ColumnMap::EntityPolicy::First) {
        out.label = label;
        out.target = entity;
        return out;
      }
      if (!agreed) {
        agreed = label;
      } else if (*agreed != *label) {
        out.drop = true;  // conflicting entity sentiments
        return out;
      }
    }
    out.label = agreed;
    out.target = entities->begin()->first;
    return out;
  }
  out.label = map_label_word(trimmed);
  return out;
}

std::optional<std::size_t> column_index(const std::vector<std::string>& header,
                                        const std::string& ref, bool has_header) {
  if (ref.empty()) return std::nullopt;
  if (has_header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == ref) return i;
    }
    return std::nullopt;
  }
  if (std::all_of(ref.begin(), ref.end(),
                  [](unsigned char c) { return std::isdigit(c); })) {
    return static_cast<std::size_t>(std::stoul(ref));
  }
  return std::nullopt;
}

}  // namespace

Dataset load_dataset(DatasetName name, const std::filesystem::path& path,
                     const ColumnMap& columns, std::vector<RecordIssue>* issues) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset file: " + path.string());

  Dataset dataset;
  dataset.name = name;
  dataset.scheme = scheme_for(name);
  const std::string source = to_string(name);

  const auto reject = [&](std::size_t row, const std::string& reason,
                          const std::string& value) {
    if (issues != nullptr) {
      issues->push_back({row, reason});
      return;
    }
    throw UnmappableLabelError(row, value);
  };

  const auto finish_record = [&](std::size_t row, std::string id, std::string text,
                                 const LabelCell& cell, std::optional<double> score,
                                 std::optional<std::string> target) {
    LabeledRecord record;
    record.id = id.empty() ? source + "-" + std::to_string(row) : std::move(id);
    record.text = std::move(text);
    record.source = source;
    record.score = score;
    record.target = cell.target ? cell.target : std::move(target);
    if (score.has_value() && !cell.label.has_value()) {
      record.gold = *score > 0 ? SentimentLabel::Positive : SentimentLabel::Negative;
    } else if (cell.label.has_value()) {
      record.gold = *cell.label;
    }
    dataset.records.push_back(std::move(record));
  };

  if (columns.format == FileFormat::JsonLines) {
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      ++row;
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& ex) {
        reject(row, std::string("malformed JSON line: ") + ex.what(), line);
        continue;
      }
      if (!doc.contains(columns.text) || !doc.at(columns.text).is_string()) {
        throw MissingColumnError("row " + std::to_string(row) + ": missing text field '" +
                                 columns.text + "'");
      }
      const std::string text = doc.at(columns.text).get<std::string>();
      std::optional<double> score;
      if (!columns.score.empty()) {
        if (!doc.contains(columns.score) || !doc.at(columns.score).is_number()) {
          throw MissingColumnError("row " + std::to_string(row) +
                                   ": missing score field '" + columns.score + "'");
        }
        score = doc.at(columns.score).get<double>();
      }
      LabelCell cell;
      if (!columns.label.empty()) {
        if (!doc.contains(columns.label)) {
          throw MissingColumnError("row " + std::to_string(row) +
                                   ": missing label field '" + columns.label + "'");
        }
        const auto& value = doc.at(columns.label);
        const std::string raw = value.is_string() ? value.get<std::string>() : value.dump();
        cell = resolve_label_cell(raw, columns.entity_policy);
        if (cell.drop) continue;
        if (!cell.label) {
          reject(row, "unmappable label '" + raw + "'", raw);
          continue;
        }
      } else if (!score.has_value()) {
        throw MissingColumnError("column map names neither a label nor a score field");
      }
      std::optional<std::string> target;
      if (!columns.target.empty() && doc.contains(columns.target) &&
          doc.at(columns.target).is_string()) {
        target = doc.at(columns.target).get<std::string>();
      }
      std::string id;
      if (!columns.id.empty() && doc.contains(columns.id)) {
        const auto& value = doc.at(columns.id);
        id = value.is_string() ? value.get<std::string>() : value.dump();
      }
      finish_record(row, std::move(id), text, cell, score, std::move(target));
    }
  } else {
    auto rows = read_delimited(in, columns.delimiter);
    std::vector<std::string> header;
    std::size_t first_data = 0;
    if (columns.has_header) {
      if (rows.empty()) throw EmptyDatasetError("empty dataset file: " + path.string());
      header = rows.front();
      first_data = 1;
    }
    const auto text_col = column_index(header, columns.text, columns.has_header);
    if (!text_col) {
      throw MissingColumnError("text column '" + columns.text + "' not found");
    }
    const auto label_col = column_index(header, columns.label, columns.has_header);
    if (!columns.label.empty() && columns.has_header && !label_col) {
      throw MissingColumnError("label column '" + columns.label + "' not found");
    }
    const auto score_col = column_index(header, columns.score, columns.has_header);
    if (!columns.score.empty() && columns.has_header && !score_col) {
      throw MissingColumnError("score column '" + columns.score + "' not found");
    }
    const auto target_col = column_index(header, columns.target, columns.has_header);
    const auto id_col = column_index(header, columns.id, columns.has_header);
    if (!label_col && !score_col) {
      throw MissingColumnError("column map names neither a label nor a score column");
    }

    std::size_t row = 0;
    for (std::size_t r = first_data; r < rows.size(); ++r) {
      const auto& cells = rows[r];
      if (cells.size() == 1 && trim(cells[0]).empty()) continue;
      ++row;
      if (*text_col >= cells.size()) {
        throw MissingColumnError("row " + std::to_string(row) + ": no text column " +
                                 std::to_string(*text_col));
      }
      const std::string text = cells[*text_col];
      std::optional<double> score;
      if (score_col && *score_col < cells.size()) {
        try {
          score = std::stod(cells[*score_col]);
        } catch (const std::exception&) {
          reject(row, "unparseable score '" + cells[*score_col] + "'",
                 cells[*score_col]);
          continue;
        }
      }
      LabelCell cell;
      if (label_col) {
        if (*label_col >= cells.size()) {
          throw MissingColumnError("row " + std::to_string(row) + ": no label column " +
                                   std::to_string(*label_col));
        }
        cell = resolve_label_cell(cells[*label_col], columns.entity_policy);
        if (cell.drop) continue;
        if (!cell.label) {
          reject(row, "unmappable label '" + cells[*label_col] + "'",
                 cells[*label_col]);
          continue;
        }
      }
      std::optional<std::string> target;
      if (target_col && *target_col < cells.size() && !cells[*target_col].empty()) {
        target = cells[*target_col];
      }
      std::string id;
      if (id_col && *id_col < cells.size()) id = cells[*id_col];
      finish_record(row, std::move(id), text, cell, score, std::move(target));
    }
  }

  if (dataset.records.empty()) {
    throw EmptyDatasetError("no usable records in " + path.string());
  }
  return dataset;
}

Dataset quantize_fiqa(const Dataset& dataset, double threshold) {
  Dataset out;
  out.name = dataset.name;
  out.scheme = LabelScheme::Binary;
  for (const LabeledRecord& record : dataset.records) {
    if (!record.score.has_value()) {
      throw DatasetError("record " + record.id + " has no sentiment score");
    }
    const double score = *record.score;
    if (std::abs(score) > threshold) {
      LabeledRecord kept = record;
      kept.gold = score > 0 ? SentimentLabel::Positive : SentimentLabel::Negative;
      out.records.push_back(std::move(kept));
    }
  }
  return out;
}

LabelCounts count_labels(const Dataset& dataset) {
  LabelCounts counts;
  for (const LabeledRecord& record : dataset.records) {
    switch (record.gold) {
      case SentimentLabel::Positive: ++counts.positive; break;
      case SentimentLabel::Negative: ++counts.negative; break;
      case SentimentLabel::Neutral: ++counts.neutral; break;
    }
  }
  return counts;
}

LabelCounts expected_stats(DatasetName name) {
  switch (name) {
    case DatasetName::FPB: return {570, 303, 1391};
    case DatasetName::StockSen: return {4542, 1676, 0};
    case DatasetName::CMC: return {12022, 1523, 0};
    case DatasetName::FiQA: return {507, 264, 0};
    case DatasetName::SEntFiN: return {2832, 2373, 2701};
  }
  return {};
}

StatsReport validate_stats(const Dataset& dataset) {
  const LabelCounts expected = expected_stats(dataset.name);
  const LabelCounts actual = count_labels(dataset);
  StatsReport report;
  report.dataset = dataset.name;
  report.rows.push_back({"positive", expected.positive, actual.positive});
  report.rows.push_back({"negative", expected.negative, actual.negative});
  if (dataset.scheme == LabelScheme::Ternary) {
    report.rows.push_back({"neutral", expected.neutral, actual.neutral});
  }
  report.rows.push_back({"total", expected.total(), actual.total()});
  report.pass = std::all_of(report.rows.begin(), report.rows.end(),
                            [](const StatsRow& row) { return row.delta() == 0; });
  return report;
}

std::string stats_table(const StatsReport& report) {
  std::ostringstream out;
  out << "dataset: " << to_string(report.dataset) << "\n";
  out << "label      expected    actual     delta\n";
  for (const StatsRow& row : report.rows) {
    char line[96];
    std::snprintf(line, sizeof(line), "%-10s %9ld %9ld %+9ld\n", row.label.c_str(),
                  row.expected, row.actual, row.delta());
    out << line;
  }
  out << (report.pass ? "PASS" : "FAIL") << "\n";
  return out.str();
}

void write_snapshot(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write snapshot " + path.string());
  for (const LabeledRecord& record : dataset.records) {
    nlohmann::json doc{{"id", record.id},
                       {"text", record.text},
                       {"gold", to_string(record.gold)},
                       {"source", record.source}};
    if (record.score) doc["score"] = *record.score;
    if (record.target) doc["target"] = *record.target;
    out << doc.dump() << "\n";
  }
}

Dataset read_snapshot(DatasetName name, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open snapshot " + path.string());
  Dataset dataset;
  dataset.name = name;
  dataset.scheme = scheme_for(name);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw DatasetError(std::string("malformed snapshot line: ") + ex.what());
    }
    LabeledRecord record;
    record.id = doc.at("id").get<std::string>();
    record.text = doc.at("text").get<std::string>();
    if (auto label = label_from_string(doc.at("gold").get<std::string>())) {
      record.gold = *label;
    }
    record.source = doc.value("source", to_string(name));
    if (doc.contains("score")) record.score = doc.at("score").get<double>();
    if (doc.contains("target")) record.target = doc.at("target").get<std::string>();
    dataset.records.push_back(std::move(record));
  }
  if (dataset.records.empty()) {
    throw EmptyDatasetError("empty snapshot: " + path.string());
  }
  return dataset;
}

}  // namespace had
