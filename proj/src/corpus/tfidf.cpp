#include "sentiaug/corpus/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace sentiaug::corpus {

double SparseRow::dot(const std::vector<double>& dense) const {
  double s = 0.0;
  for (const auto& [t, w] : entries) s += w * dense[static_cast<std::size_t>(t)];
  return s;
}

double SparseRow::weight(int term) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), std::pair<int, double>(term, -INFINITY));
  return it != entries.end() && it->first == term ? it->second : 0.0;
}

void TfidfModel::fit(const std::vector<std::vector<int>>& docs, std::size_t vocab_size) {
  if (docs.empty()) throw std::invalid_argument("TfidfModel::fit: no documents");
  num_docs_ = docs.size();
  df_.assign(vocab_size, 0);
  idf_.assign(vocab_size, 0.0);
  std::vector<std::size_t> last_seen(vocab_size, SIZE_MAX);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (int t : docs[d]) {
      if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
        throw std::out_of_range("TfidfModel::fit: term id " + std::to_string(t) + " outside vocabulary");
      }
      auto& seen = last_seen[static_cast<std::size_t>(t)];
      if (seen != d) {
        seen = d;
        ++df_[static_cast<std::size_t>(t)];
      }
    }
  }
  for (std::size_t t = 0; t < vocab_size; ++t) {
    if (df_[t] > 0) idf_[t] = std::log(static_cast<double>(num_docs_) / static_cast<double>(df_[t]));
  }
}

TfidfModel TfidfModel::from_counts(std::size_t num_docs, std::vector<std::size_t> df) {
  if (num_docs == 0) throw std::invalid_argument("TfidfModel::from_counts: no documents");
  TfidfModel m;
  m.num_docs_ = num_docs;
  m.df_ = std::move(df);
  m.idf_.assign(m.df_.size(), 0.0);
  for (std::size_t t = 0; t < m.df_.size(); ++t) {
    if (m.df_[t] > num_docs) throw std::invalid_argument("TfidfModel::from_counts: df exceeds document count");
    if (m.df_[t] > 0) m.idf_[t] = std::log(static_cast<double>(num_docs) / static_cast<double>(m.df_[t]));
  }
  return m;
}

SparseRow TfidfModel::transform(const std::vector<int>& doc, bool l2_normalize) const {
  std::map<int, std::size_t> tf;
  for (int t : doc) {
    if (t >= 0 && static_cast<std::size_t>(t) < df_.size() && df_[static_cast<std::size_t>(t)] > 0) ++tf[t];
  }
  SparseRow row;
  double sq = 0.0;
  for (const auto& [t, count] : tf) {
    const double w = static_cast<double>(count) * idf_[static_cast<std::size_t>(t)];
    if (w == 0.0) continue;
    row.entries.emplace_back(t, w);
    sq += w * w;
  }
  if (l2_normalize && sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& e : row.entries) e.second *= inv;
  }
  return row;
}

std::vector<SparseRow> TfidfModel::transform(const std::vector<std::vector<int>>& docs, bool l2_normalize) const {
  std::vector<SparseRow> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(transform(d, l2_normalize));
  return out;
}

std::vector<SparseRow> featurize_tfidf(const std::vector<std::vector<int>>& docs, std::size_t vocab_size) {
  TfidfModel m;
  m.fit(docs, vocab_size);
  return m.transform(docs);
}

}  // namespace sentiaug::corpus
