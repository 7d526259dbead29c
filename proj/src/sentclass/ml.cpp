#include "sentiaug/sentclass/ml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "sentiaug/numerics/random.hpp"

namespace sentiaug::clf {

namespace {

constexpr double kMinScale = 1e-9;

std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

void check_training_set(const std::vector<SparseRow>& x, std::span<const int> y, std::size_t k, std::size_t f) {
  if (x.size() != y.size()) throw std::invalid_argument("train_ml: rows and labels differ in length");
  if (x.empty()) throw std::invalid_argument("train_ml: empty training set");
  if (k < 2 || f == 0) throw std::invalid_argument("train_ml: need k >= 2 and at least one feature");
  std::vector<bool> seen(k, false);
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= k) throw std::out_of_range("train_ml: label out of range");
    seen[static_cast<std::size_t>(label)] = true;
  }
  if (std::count(seen.begin(), seen.end(), true) < 2) {
    throw std::invalid_argument("train_ml: training set holds a single category");
  }
  for (const auto& row : x) {
    for (const auto& [t, v] : row.entries) {
      if (t < 0 || static_cast<std::size_t>(t) >= f) throw std::out_of_range("train_ml: feature id out of range");
      if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("train_ml: feature weights must be finite and >= 0");
    }
  }
}

nlohmann::json doubles_to_json(const std::vector<double>& v) {
  auto j = nlohmann::json::array();
  for (double d : v) {
    if (std::isfinite(d)) {
      j.push_back(d);
    } else {
      j.push_back(nullptr);
    }
  }
  return j;
}

std::vector<double> doubles_from_json(const nlohmann::json& j) {
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(e.is_null() ? -std::numeric_limits<double>::infinity() : e.get<double>());
  return v;
}

double gini_term(const std::vector<double>& counts, double total) {
  if (total <= 0.0) return 0.0;
  double sq = 0.0;
  for (double c : counts) sq += c * c;
  return total - sq / total;  // total * gini
}

struct TreeBuilder {
  const std::vector<SparseRow>& x;
  std::span<const int> y;
  std::span<const double> w;
  std::size_t k, max_depth, min_split;
  std::vector<TreeNode> nodes;

  int build(const std::vector<std::size_t>& idx, std::size_t depth) {
    std::vector<double> totals(k, 0.0);
    double total = 0.0;
    for (std::size_t i : idx) {
      totals[static_cast<std::size_t>(y[i])] += w[i];
      total += w[i];
    }
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes.back().label = static_cast<int>(argmax(totals));
    const std::size_t nonzero_classes =
        static_cast<std::size_t>(std::count_if(totals.begin(), totals.end(), [](double t) { return t > 0.0; }));
    if (depth >= max_depth || idx.size() < min_split || nonzero_classes <= 1) return id;

    std::vector<std::tuple<int, double, std::size_t>> cells;
    for (std::size_t i : idx)
      for (const auto& [t, v] : x[i].entries)
        if (v > 0.0) cells.emplace_back(t, v, i);
    std::sort(cells.begin(), cells.end());

    const double parent = gini_term(totals, total);
    double best = parent - 1e-12 * std::max(1.0, total);
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<double> left(k), right(k);
    for (std::size_t s = 0; s < cells.size();) {
      const int feature = std::get<0>(cells[s]);
      std::size_t e = s;
      while (e < cells.size() && std::get<0>(cells[e]) == feature) ++e;
      // left starts as the rows without this feature
      left = totals;
      std::fill(right.begin(), right.end(), 0.0);
      for (std::size_t c = s; c < e; ++c) {
        const std::size_t i = std::get<2>(cells[c]);
        left[static_cast<std::size_t>(y[i])] -= w[i];
        right[static_cast<std::size_t>(y[i])] += w[i];
      }
      std::size_t left_rows = idx.size() - (e - s);
      double left_w = 0.0, right_w = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        left[c] = std::max(0.0, left[c]);
        left_w += left[c];
        right_w += right[c];
      }
      for (std::size_t p = s; p < e; ++p) {
        // candidate: zeros plus cells[s, p) go left
        const double v = std::get<1>(cells[p]);
        if ((p == s || v != std::get<1>(cells[p - 1])) && left_rows > 0) {
          const double impurity = gini_term(left, left_w) + gini_term(right, right_w);
          if (impurity < best) {
            best = impurity;
            best_feature = feature;
            best_threshold = p == s ? 0.0 : 0.5 * (std::get<1>(cells[p - 1]) + v);
          }
        }
        const std::size_t i = std::get<2>(cells[p]);
        const auto label = static_cast<std::size_t>(y[i]);
        left[label] += w[i];
        right[label] = std::max(0.0, right[label] - w[i]);
        left_w += w[i];
        right_w = std::max(0.0, right_w - w[i]);
        ++left_rows;
      }
      s = e;
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> go_left, go_right;
    for (std::size_t i : idx) (x[i].weight(best_feature) <= best_threshold ? go_left : go_right).push_back(i);
    if (go_left.empty() || go_right.empty()) return id;
    nodes[static_cast<std::size_t>(id)].feature = best_feature;
    nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
    const int l = build(go_left, depth + 1);
    const int r = build(go_right, depth + 1);
    nodes[static_cast<std::size_t>(id)].left = l;
    nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

std::size_t subtree_depth(const std::vector<TreeNode>& nodes, int id) {
  const auto& n = nodes[static_cast<std::size_t>(id)];
  if (n.feature < 0) return 0;
  return 1 + std::max(subtree_depth(nodes, n.left), subtree_depth(nodes, n.right));
}

}  // namespace

std::string to_string(MLKind k) {
  switch (k) {
    case MLKind::naive_bayes: return "nb";
    case MLKind::logistic: return "logreg";
    case MLKind::svm: return "svm";
    case MLKind::tree: return "tree";
    case MLKind::adaboost: return "adaboost";
  }
  return "?";
}

MLKind parse_ml_kind(const std::string& s) {
  for (MLKind k : {MLKind::naive_bayes, MLKind::logistic, MLKind::svm, MLKind::tree, MLKind::adaboost})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown ML model kind: " + s);
}

void MLHyper::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("MLHyper: alpha must be positive");
  if (!(l2 >= 0.0) || !(lr > 0.0)) throw std::invalid_argument("MLHyper: need l2 >= 0 and lr > 0");
  if (epochs == 0 || max_depth == 0 || stumps == 0) throw std::invalid_argument("MLHyper: epochs, max_depth and stumps must be positive");
  if (min_split < 2) throw std::invalid_argument("MLHyper: min_split must be at least 2");
}

DecisionTree DecisionTree::fit(const std::vector<SparseRow>& x, std::span<const int> y, std::span<const double> w,
                               std::size_t num_categories, std::size_t max_depth, std::size_t min_split) {
  std::vector<double> ones;
  if (w.empty()) {
    ones.assign(x.size(), 1.0);
    w = ones;
  }
  if (w.size() != x.size() || y.size() != x.size() || x.empty()) throw std::invalid_argument("DecisionTree::fit: size mismatch");
  TreeBuilder b{x, y, w, num_categories, max_depth, min_split, {}};
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  b.build(idx, 0);
  DecisionTree t;
  t.nodes_ = std::move(b.nodes);
  return t;
}

int DecisionTree::predict(const SparseRow& row) const {
  int id = 0;
  while (nodes_[static_cast<std::size_t>(id)].feature >= 0) {
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    id = row.weight(n.feature) <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(id)].label;
}

std::size_t DecisionTree::depth() const { return nodes_.empty() ? 0 : subtree_depth(nodes_, 0); }

void to_json(nlohmann::json& j, const DecisionTree& t) {
  j = nlohmann::json::array();
  for (const auto& n : t.nodes_) j.push_back({n.feature, n.threshold, n.left, n.right, n.label});
}

void from_json(const nlohmann::json& j, DecisionTree& t) {
  t.nodes_.clear();
  for (const auto& n : j) {
    t.nodes_.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(), n.at(4).get<int>()});
  }
  const auto count = static_cast<int>(t.nodes_.size());
  for (const auto& n : t.nodes_) {
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)) {
      throw std::invalid_argument("DecisionTree: corrupt node table");
    }
  }
}

MLModel MLModel::train(MLKind kind, const std::vector<SparseRow>& x, std::span<const int> y, std::size_t num_categories,
                       std::size_t num_features, const MLHyper& hyper) {
  hyper.validate();
  check_training_set(x, y, num_categories, num_features);
  MLModel m;
  m.kind_ = kind;
  m.k_ = num_categories;
  m.f_ = num_features;
  const std::size_t n = x.size(), k = num_categories, f = num_features;

  switch (kind) {
    case MLKind::naive_bayes: {
      std::vector<double> docs(k, 0.0), mass(k * f, 0.0), totals(k, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(y[i]);
        docs[c] += 1.0;
        for (const auto& [t, v] : x[i].entries) {
          mass[c * f + static_cast<std::size_t>(t)] += v;
          totals[c] += v;
        }
      }
      m.log_prior_.resize(k);
      m.log_lik_.resize(k * f);
      for (std::size_t c = 0; c < k; ++c) {
        m.log_prior_[c] = std::log(docs[c] / static_cast<double>(n));
        const double denom = std::log(totals[c] + hyper.alpha * static_cast<double>(f));
        for (std::size_t t = 0; t < f; ++t) m.log_lik_[c * f + t] = std::log(mass[c * f + t] + hyper.alpha) - denom;
      }
      break;
    }
    case MLKind::logistic:
    case MLKind::svm: {
      m.w_.assign(k * f, 0.0);
      m.b_.assign(k, 0.0);
      double s = 1.0;
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::vector<double> score(k);
      const double decay = 1.0 - hyper.lr * hyper.l2;
      for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        num::Rng rng(num::derive_seed(hyper.seed, 0x5cd, epoch));
        std::shuffle(order.begin(), order.end(), rng.engine());
        for (std::size_t i : order) {
          s *= decay;
          const auto& row = x[i];
          for (std::size_t c = 0; c < k; ++c) {
            double dot = 0.0;
            for (const auto& [t, v] : row.entries) dot += m.w_[c * f + static_cast<std::size_t>(t)] * v;
            score[c] = s * dot + m.b_[c];
          }
          if (kind == MLKind::logistic) {
            const double mx = *std::max_element(score.begin(), score.end());
            double z = 0.0;
            for (auto& sc : score) z += sc = std::exp(sc - mx);
            for (std::size_t c = 0; c < k; ++c) {
              const double g = score[c] / z - (static_cast<int>(c) == y[i] ? 1.0 : 0.0);
              for (const auto& [t, v] : row.entries) m.w_[c * f + static_cast<std::size_t>(t)] -= hyper.lr * g * v / s;
              m.b_[c] -= hyper.lr * g;
            }
          } else {
            for (std::size_t c = 0; c < k; ++c) {
              const double target = static_cast<int>(c) == y[i] ? 1.0 : -1.0;
              if (target * score[c] >= 1.0) continue;
              for (const auto& [t, v] : row.entries) m.w_[c * f + static_cast<std::size_t>(t)] += hyper.lr * target * v / s;
              m.b_[c] += hyper.lr * target;
            }
          }
          if (s < kMinScale) {
            for (auto& wv : m.w_) wv *= s;
            s = 1.0;
          }
        }
      }
      for (auto& wv : m.w_) wv *= s;
      break;
    }
    case MLKind::tree:
      m.tree_ = DecisionTree::fit(x, y, {}, k, hyper.max_depth, hyper.min_split);
      break;
    case MLKind::adaboost: {
      std::vector<double> w(n, 1.0 / static_cast<double>(n));
      const double kd = static_cast<double>(k);
      for (std::size_t stage = 0; stage < hyper.stumps; ++stage) {
        DecisionTree stump = DecisionTree::fit(x, y, w, k, 1, 2);
        std::vector<bool> miss(n);
        double err = 0.0, total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          miss[i] = stump.predict(x[i]) != y[i];
          if (miss[i]) err += w[i];
          total += w[i];
        }
        err /= total;
        if (err >= 1.0 - 1.0 / kd) {
          if (m.stumps_.empty()) {
            m.stumps_.push_back(std::move(stump));
            m.stage_w_.push_back(1.0);
          }
          break;
        }
        const double e = std::max(err, 1e-10);
        const double alpha = std::log((1.0 - e) / e) + std::log(kd - 1.0);
        m.stumps_.push_back(std::move(stump));
        m.stage_w_.push_back(alpha);
        if (err <= 0.0) break;
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (miss[i]) w[i] *= std::exp(alpha);
          z += w[i];
        }
        for (auto& wi : w) wi /= z;
      }
      break;
    }
  }
  return m;
}

std::vector<double> MLModel::scores(const SparseRow& row) const {
  std::vector<double> out(k_, 0.0);
  switch (kind_) {
    case MLKind::naive_bayes:
      for (std::size_t c = 0; c < k_; ++c) {
        double s = log_prior_[c];
        for (const auto& [t, v] : row.entries)
          if (static_cast<std::size_t>(t) < f_) s += v * log_lik_[c * f_ + static_cast<std::size_t>(t)];
        out[c] = s;
      }
      break;
    case MLKind::logistic:
    case MLKind::svm:
      for (std::size_t c = 0; c < k_; ++c) {
        double s = b_[c];
        for (const auto& [t, v] : row.entries)
          if (static_cast<std::size_t>(t) < f_) s += v * w_[c * f_ + static_cast<std::size_t>(t)];
        out[c] = s;
      }
      break;
    case MLKind::tree:
      out[static_cast<std::size_t>(tree_.predict(row))] = 1.0;
      break;
    case MLKind::adaboost:
      for (std::size_t s = 0; s < stumps_.size(); ++s) out[static_cast<std::size_t>(stumps_[s].predict(row))] += stage_w_[s];
      break;
  }
  return out;
}

int MLModel::predict(const SparseRow& row) const { return static_cast<int>(argmax(scores(row))); }

std::vector<int> MLModel::predict(const std::vector<SparseRow>& rows) const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(predict(r));
  return out;
}

std::vector<double> MLModel::posterior(const SparseRow& row) const {
  if (kind_ != MLKind::naive_bayes) throw std::logic_error("MLModel::posterior: only defined for naive Bayes");
  auto s = scores(row);
  const double mx = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (auto& v : s) z += v = std::exp(v - mx);
  for (auto& v : s) v /= z;
  return s;
}

int MLModel::predict_staged(const SparseRow& row, std::size_t stages) const {
  if (kind_ != MLKind::adaboost) throw std::logic_error("MLModel::predict_staged: only defined for AdaBoost");
  std::vector<double> votes(k_, 0.0);
  for (std::size_t s = 0; s < std::min(stages, stumps_.size()); ++s) {
    votes[static_cast<std::size_t>(stumps_[s].predict(row))] += stage_w_[s];
  }
  return static_cast<int>(argmax(votes));
}

void to_json(nlohmann::json& j, const MLModel& m) {
  j = nlohmann::json{{"kind", to_string(m.kind_)}, {"num_categories", m.k_}, {"num_features", m.f_}};
  switch (m.kind_) {
    case MLKind::naive_bayes:
      j["log_prior"] = doubles_to_json(m.log_prior_);
      j["log_likelihood"] = doubles_to_json(m.log_lik_);
      break;
    case MLKind::logistic:
    case MLKind::svm:
      j["weights"] = m.w_;
      j["bias"] = m.b_;
      break;
    case MLKind::tree:
      j["tree"] = m.tree_;
      break;
    case MLKind::adaboost:
      j["stumps"] = m.stumps_;
      j["stage_weights"] = m.stage_w_;
      break;
  }
}

void from_json(const nlohmann::json& j, MLModel& m) {
  m = MLModel{};
  m.kind_ = parse_ml_kind(j.at("kind").get<std::string>());
  m.k_ = j.at("num_categories").get<std::size_t>();
  m.f_ = j.at("num_features").get<std::size_t>();
  switch (m.kind_) {
    case MLKind::naive_bayes:
      m.log_prior_ = doubles_from_json(j.at("log_prior"));
      m.log_lik_ = doubles_from_json(j.at("log_likelihood"));
      if (m.log_prior_.size() != m.k_ || m.log_lik_.size() != m.k_ * m.f_) throw std::invalid_argument("MLModel: NB table size mismatch");
      break;
    case MLKind::logistic:
    case MLKind::svm:
      m.w_ = j.at("weights").get<std::vector<double>>();
      m.b_ = j.at("bias").get<std::vector<double>>();
      if (m.w_.size() != m.k_ * m.f_ || m.b_.size() != m.k_) throw std::invalid_argument("MLModel: weight size mismatch");
      break;
    case MLKind::tree:
      m.tree_ = j.at("tree").get<DecisionTree>();
      break;
    case MLKind::adaboost:
      m.stumps_ = j.at("stumps").get<std::vector<DecisionTree>>();
      m.stage_w_ = j.at("stage_weights").get<std::vector<double>>();
      if (m.stumps_.size() != m.stage_w_.size()) throw std::invalid_argument("MLModel: stage count mismatch");
      break;
  }
}

}  // namespace sentiaug::clf
