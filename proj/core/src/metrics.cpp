#include "had/metrics.hpp"

namespace had {

namespace {

std::size_t index_of(SentimentLabel label) { return static_cast<std::size_t>(label); }

}  // namespace

void ConfusionMatrix::add(SentimentLabel gold, SentimentLabel predicted, long count) {
  if (!is_admissible(gold, scheme_) || !is_admissible(predicted, scheme_)) {
    throw std::invalid_argument("label not admissible under " + to_string(scheme_));
  }
  if (count < 0) throw std::invalid_argument("negative confusion count");
  counts_[index_of(gold)][index_of(predicted)] += count;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.scheme_ != scheme_) {
    throw std::invalid_argument("cannot merge confusion matrices across schemes");
  }
  for (std::size_t g = 0; g < 3; ++g) {
    for (std::size_t p = 0; p < 3; ++p) counts_[g][p] += other.counts_[g][p];
  }
}

long ConfusionMatrix::count(SentimentLabel gold, SentimentLabel predicted) const {
  return counts_[index_of(gold)][index_of(predicted)];
}

long ConfusionMatrix::total() const {
  long total = 0;
  for (const auto& row : counts_) {
    for (long c : row) total += c;
  }
  return total;
}

long ConfusionMatrix::gold_support(SentimentLabel label) const {
  long support = 0;
  for (long c : counts_[index_of(label)]) support += c;
  return support;
}

long ConfusionMatrix::predicted_count(SentimentLabel label) const {
  long predicted = 0;
  for (const auto& row : counts_) predicted += row[index_of(label)];
  return predicted;
}

std::vector<SentimentLabel> ConfusionMatrix::labels() const {
  std::vector<SentimentLabel> labels{SentimentLabel::Positive, SentimentLabel::Negative};
  if (scheme_ == LabelScheme::Ternary) labels.push_back(SentimentLabel::Neutral);
  return labels;
}

double accuracy(const ConfusionMatrix& cm) {
  const long total = cm.total();
  if (total == 0) throw EmptyRunError("accuracy of an empty run");
  long correct = 0;
  for (SentimentLabel label : cm.labels()) correct += cm.count(label, label);
  return static_cast<double>(correct) / static_cast<double>(total);
}

double f1(const ConfusionMatrix& cm, SentimentLabel label) {
  const long tp = cm.count(label, label);
  const long predicted = cm.predicted_count(label);
  const long support = cm.gold_support(label);
  const double precision =
      predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
  const double recall =
      support > 0 ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double macro_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw EmptyRunError("macro F1 of an empty run");
  double sum = 0.0;
  int classes = 0;
  for (SentimentLabel label : cm.labels()) {
    if (cm.gold_support(label) == 0) continue;  // zero-support classes excluded
    sum += f1(cm, label);
    ++classes;
  }
  if (classes == 0) throw EmptyRunError("macro F1 with no supported class");
  return sum / static_cast<double>(classes);
}

}  // namespace had
