#pragma once

// Reference computations for classifier metrics and multinomial naive Bayes,
// written straight from the definitions with no shared code.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

struct PrfOracle {
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<double> precision, recall, f1;
  double accuracy = 0.0, macro_p = 0.0, macro_r = 0.0, macro_f1 = 0.0;
};

inline PrfOracle prf(const std::vector<int>& truth, const std::vector<int>& pred, int k) {
  PrfOracle o;
  o.confusion.assign(static_cast<std::size_t>(k), std::vector<std::size_t>(static_cast<std::size_t>(k), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) o.confusion[truth[i]][pred[i]] += 1;
  double hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == pred[i] ? 1 : 0;
  o.accuracy = hits / static_cast<double>(truth.size());
  for (int c = 0; c < k; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (pred[i] == c && truth[i] == c) tp += 1;
      if (pred[i] == c && truth[i] != c) fp += 1;
      if (pred[i] != c && truth[i] == c) fn += 1;
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    o.precision.push_back(p);
    o.recall.push_back(r);
    o.f1.push_back(f);
    o.macro_p += p / k;
    o.macro_r += r / k;
    o.macro_f1 += f / k;
  }
  return o;
}

// docs[i] is a list of token ids; every token occurrence contributes one log
// factor. Returns the normalised posterior over categories for `query`.
inline std::vector<double> nb_posterior(const std::vector<std::vector<int>>& docs, const std::vector<int>& labels,
                                        int k, int vocab, double alpha, const std::vector<int>& query) {
  std::vector<double> logjoint(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    double ndocs = 0, ntok = 0;
    std::vector<double> count(static_cast<std::size_t>(vocab), 0.0);
    for (std::size_t d = 0; d < docs.size(); ++d) {
      if (labels[d] != c) continue;
      ndocs += 1;
      for (int t : docs[d]) {
        count[t] += 1;
        ntok += 1;
      }
    }
    double lj = std::log(ndocs / static_cast<double>(docs.size()));
    for (int t : query) lj += std::log((count[t] + alpha) / (ntok + alpha * vocab));
    logjoint[c] = lj;
  }
  double mx = logjoint[0];
  for (double v : logjoint) mx = v > mx ? v : mx;
  double z = 0;
  for (double v : logjoint) z += std::exp(v - mx);
  std::vector<double> post;
  for (double v : logjoint) post.push_back(std::exp(v - mx) / z);
  return post;
}

}  // namespace oracle
