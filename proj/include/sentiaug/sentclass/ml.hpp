#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sentiaug/corpus/tfidf.hpp"

namespace sentiaug::clf {

using corpus::SparseRow;

enum class MLKind { naive_bayes, logistic, svm, tree, adaboost };

std::string to_string(MLKind k);
MLKind parse_ml_kind(const std::string& s);

struct MLHyper {
  double alpha = 1.0;     // Laplace smoothing
  double l2 = 1e-4;
  double lr = 0.1;
  std::size_t epochs = 20;
  std::size_t max_depth = 12;
  std::size_t min_split = 2;
  std::size_t stumps = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  int label = 0;
};

class DecisionTree {
 public:
  // Weighted Gini splits; weights default to 1.
  static DecisionTree fit(const std::vector<SparseRow>& x, std::span<const int> y, std::span<const double> w,
                          std::size_t num_categories, std::size_t max_depth, std::size_t min_split);
  int predict(const SparseRow& row) const;
  std::size_t depth() const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  friend void to_json(nlohmann::json& j, const DecisionTree& t);
  friend void from_json(const nlohmann::json& j, DecisionTree& t);

 private:
  std::vector<TreeNode> nodes_;
};

class MLModel {
 public:
  // Rows hold nonnegative feature weights over [0, num_features).
  static MLModel train(MLKind kind, const std::vector<SparseRow>& x, std::span<const int> y,
                       std::size_t num_categories, std::size_t num_features, const MLHyper& hyper);

  MLKind kind() const { return kind_; }
  std::size_t num_categories() const { return k_; }
  std::size_t num_features() const { return f_; }

  // Per-category scores; argmax is the prediction (lowest id on ties).
  // NB: log joint; logistic/SVM: linear scores; tree: one-hot; AdaBoost: stage-weight votes.
  std::vector<double> scores(const SparseRow& row) const;
  int predict(const SparseRow& row) const;
  std::vector<int> predict(const std::vector<SparseRow>& rows) const;

  // NB posterior, sums to 1.
  std::vector<double> posterior(const SparseRow& row) const;
  double log_prior(int c) const { return log_prior_.at(static_cast<std::size_t>(c)); }
  double log_likelihood(int c, int term) const { return log_lik_.at(static_cast<std::size_t>(c) * f_ + static_cast<std::size_t>(term)); }

  // AdaBoost: prediction using only the first `stages` stumps.
  int predict_staged(const SparseRow& row, std::size_t stages) const;
  std::size_t num_stages() const { return stumps_.size(); }
  const std::vector<double>& stage_weights() const { return stage_w_; }
  const std::vector<DecisionTree>& stumps() const { return stumps_; }

  const DecisionTree& tree() const { return tree_; }

  friend void to_json(nlohmann::json& j, const MLModel& m);
  friend void from_json(const nlohmann::json& j, MLModel& m);

 private:
  MLKind kind_ = MLKind::naive_bayes;
  std::size_t k_ = 0;
  std::size_t f_ = 0;
  std::vector<double> log_prior_;
  std::vector<double> log_lik_;  // [k][f]
  std::vector<double> w_;        // [k][f]
  std::vector<double> b_;        // [k]
  DecisionTree tree_;
  std::vector<DecisionTree> stumps_;
  std::vector<double> stage_w_;
};

}  // namespace sentiaug::clf
