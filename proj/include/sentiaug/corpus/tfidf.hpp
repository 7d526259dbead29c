#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace sentiaug::corpus {

struct SparseRow {
  std::vector<std::pair<int, double>> entries;  // ascending term id, nonzero weights only
  double dot(const std::vector<double>& dense) const;
  double weight(int term) const;
};

// weight(t, d) = tf(t, d) * log(N / df(t)), with N and df taken from the fitted documents.
// Terms absent from the fitted documents get no column.
class TfidfModel {
 public:
  void fit(const std::vector<std::vector<int>>& docs, std::size_t vocab_size);
  // Rebuilds a fitted model from its document count and per-term df.
  static TfidfModel from_counts(std::size_t num_docs, std::vector<std::size_t> df);
  SparseRow transform(const std::vector<int>& doc, bool l2_normalize = false) const;
  std::vector<SparseRow> transform(const std::vector<std::vector<int>>& docs, bool l2_normalize = false) const;

  std::size_t num_docs() const { return num_docs_; }
  std::size_t vocab_size() const { return idf_.size(); }
  std::size_t df(int term) const { return df_.at(static_cast<std::size_t>(term)); }
  double idf(int term) const { return idf_.at(static_cast<std::size_t>(term)); }
  bool present(int term) const { return df(term) > 0; }
  const std::vector<std::size_t>& df_counts() const { return df_; }

 private:
  std::size_t num_docs_ = 0;
  std::vector<std::size_t> df_;
  std::vector<double> idf_;
};

std::vector<SparseRow> featurize_tfidf(const std::vector<std::vector<int>>& docs, std::size_t vocab_size);

}  // namespace sentiaug::corpus
