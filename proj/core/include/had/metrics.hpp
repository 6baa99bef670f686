#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "had/types.hpp"

namespace had {

class EmptyRunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square count matrix over the run scheme's labels, indexed by
/// (gold, predicted). Merging is associative and commutative, so concurrent
/// evaluation shards can be combined in any order.
class ConfusionMatrix {
 public:
  ConfusionMatrix() : ConfusionMatrix(LabelScheme::Ternary) {}
  explicit ConfusionMatrix(LabelScheme scheme) : scheme_(scheme) {}

  /// Throws std::invalid_argument when a label is inadmissible under the
  /// scheme.
  void add(SentimentLabel gold, SentimentLabel predicted, long count = 1);
  void merge(const ConfusionMatrix& other);

  long count(SentimentLabel gold, SentimentLabel predicted) const;
  long total() const;
  long gold_support(SentimentLabel label) const;
  long predicted_count(SentimentLabel label) const;

  LabelScheme scheme() const { return scheme_; }
  std::vector<SentimentLabel> labels() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  LabelScheme scheme_;
  std::array<std::array<long, 3>, 3> counts_{};
};

/// trace / total. Throws EmptyRunError when the matrix is empty.
double accuracy(const ConfusionMatrix& cm);

/// Per-class F1 = 2PR/(P+R), defined as 0 when P+R is 0.
double f1(const ConfusionMatrix& cm, SentimentLabel label);

/// Unweighted mean of per-class F1 over classes with nonzero gold support.
/// Throws EmptyRunError when the matrix is empty.
double macro_f1(const ConfusionMatrix& cm);

}  // namespace had
