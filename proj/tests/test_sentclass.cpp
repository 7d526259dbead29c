#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include <nlohmann/json.hpp>

#include "fixtures/synthetic.hpp"
#include "oracles/cls_oracles.hpp"
#include "sentiaug/numerics/checkpoint.hpp"
#include "sentiaug/sentclass/classifier.hpp"
#include "sentiaug/sentclass/metrics.hpp"
#include "sentiaug/sentclass/ml.hpp"
#include "sentiaug/sentclass/nn.hpp"

namespace clf = sentiaug::clf;
namespace corpus = sentiaug::corpus;

namespace {

corpus::SparseRow counts_row(const std::vector<int>& tokens) {
  std::map<int, double> c;
  for (int t : tokens) c[t] += 1.0;
  corpus::SparseRow r;
  for (auto [t, v] : c) r.entries.emplace_back(t, v);
  return r;
}

corpus::SparseRow dense_row(const std::vector<double>& v) {
  corpus::SparseRow r;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) r.entries.emplace_back(static_cast<int>(i), v[i]);
  return r;
}

std::vector<const corpus::Record*> ptrs(const std::vector<corpus::Record>& recs) {
  std::vector<const corpus::Record*> out;
  for (const auto& r : recs) out.push_back(&r);
  return out;
}

// Three linearly separable clusters over 4 nonnegative features.
void cluster_toy(std::vector<corpus::SparseRow>& x, std::vector<int>& y, std::size_t per, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> hi(1.0, 2.0), lo(0.0, 0.6);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < per; ++i) {
      std::vector<double> v = {lo(eng), lo(eng), lo(eng), lo(eng)};
      v[static_cast<std::size_t>(c)] = hi(eng);
      x.push_back(dense_row(v));
      y.push_back(c);
    }
  }
}

// Linearly separable two-feature set.
void separable_toy(std::vector<corpus::SparseRow>& x, std::vector<int>& y) {
  std::mt19937_64 eng(14);
  std::uniform_real_distribution<double> hi(1.0, 2.0), lo(0.0, 0.5);
  for (int i = 0; i < 40; ++i) {
    x.push_back(dense_row({hi(eng), lo(eng)}));
    y.push_back(0);
    x.push_back(dense_row({lo(eng), hi(eng)}));
    y.push_back(1);
  }
}

const fixture::Fixture& small_fixture() {
  static const fixture::Fixture f = fixture::build(fixture::three_category_spec(300), 17);
  return f;
}

clf::NNHyper small_nn() {
  clf::NNHyper h;
  h.d_emb = 24;
  h.d_h = 24;
  h.filters = 24;
  h.widths = {2, 3};
  h.max_len = 17;
  h.max_epochs = 5;
  h.batch_size = 32;
  h.lr = 5e-3;
  h.seed = 3;
  return h;
}

}  // namespace

TEST(ClsMetrics, HandConfusion) {
  // rows = truth (pos, neg)
  const auto m = clf::metrics_from_confusion({{5, 0}, {2, 3}});
  EXPECT_DOUBLE_EQ(m.precision[1], 1.0);
  EXPECT_DOUBLE_EQ(m.recall[1], 0.6);
  EXPECT_NEAR(m.f1[1], 0.75, 1e-15);
  EXPECT_NEAR(m.precision[0], 5.0 / 7.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.recall[0], 1.0);
  EXPECT_NEAR(m.f1[0], 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(m.macro_f1, 19.0 / 24.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.8);
  EXPECT_EQ(m.total(), 10u);
}

TEST(ClsMetrics, PerfectPredictions) {
  const std::vector<int> t = {0, 1, 2, 2, 1, 0, 0};
  const auto m = clf::compute_metrics(t, t, 3);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.macro_precision, 1.0);
  EXPECT_EQ(m.macro_recall, 1.0);
  EXPECT_EQ(m.macro_f1, 1.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) {
        EXPECT_EQ(m.confusion[i][j], 0u);
      }
}

TEST(ClsMetrics, ConstantPredictorOnBalancedSet) {
  const std::vector<int> t = {0, 1, 0, 1, 0, 1, 0, 1};
  const std::vector<int> p(8, 0);
  const auto m = clf::compute_metrics(t, p, 2);
  EXPECT_EQ(m.accuracy, 0.5);
  EXPECT_EQ(m.precision[1], 0.0);
  EXPECT_EQ(m.recall[1], 0.0);
  EXPECT_EQ(m.f1[1], 0.0);
}

TEST(ClsMetrics, AbsentCategoryCountsAsZeroInMacro) {
  const std::vector<int> t = {0, 1, 0, 1};
  const auto m = clf::compute_metrics(t, t, 3);
  EXPECT_EQ(m.f1[2], 0.0);
  EXPECT_NEAR(m.macro_f1, 2.0 / 3.0, 1e-15);
}

TEST(ClsMetrics, MatchesBruteForceOnRandomSets) {
  std::mt19937_64 eng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(eng() % 4);
    const std::size_t n = 1 + eng() % 60;
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(eng() % static_cast<std::uint64_t>(k));
      p[i] = eng() % 3 == 0 ? t[i] : static_cast<int>(eng() % static_cast<std::uint64_t>(k));
    }
    const auto m = clf::compute_metrics(t, p, static_cast<std::size_t>(k));
    const auto o = oracle::prf(t, p, k);
    EXPECT_EQ(m.confusion, o.confusion);
    EXPECT_EQ(m.total(), n);
    EXPECT_NEAR(m.accuracy, o.accuracy, 1e-12);
    EXPECT_NEAR(m.macro_precision, o.macro_p, 1e-12);
    EXPECT_NEAR(m.macro_recall, o.macro_r, 1e-12);
    EXPECT_NEAR(m.macro_f1, o.macro_f1, 1e-12);
    for (int c = 0; c < k; ++c) {
      EXPECT_NEAR(m.precision[c], o.precision[c], 1e-12);
      EXPECT_NEAR(m.recall[c], o.recall[c], 1e-12);
      EXPECT_NEAR(m.f1[c], o.f1[c], 1e-12);
      for (double s : {m.precision[c], m.recall[c], m.f1[c]}) {
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
      }
    }
  }
}

TEST(ClsMetrics, MacroF1InvariantUnderRelabeling) {
  std::mt19937_64 eng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 4, n = 40;
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(eng() % k);
      p[i] = static_cast<int>(eng() % k);
    }
    std::vector<int> perm = {0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), eng);
    std::vector<int> tp(n), pp(n);
    for (std::size_t i = 0; i < n; ++i) {
      tp[i] = perm[static_cast<std::size_t>(t[i])];
      pp[i] = perm[static_cast<std::size_t>(p[i])];
    }
    EXPECT_NEAR(clf::compute_metrics(t, p, k).macro_f1, clf::compute_metrics(tp, pp, k).macro_f1, 1e-12);
  }
}

TEST(ClsMetrics, JsonRoundTrip) {
  const auto m = clf::metrics_from_confusion({{4, 1, 0}, {2, 3, 1}, {0, 0, 5}});
  const nlohmann::json j = m;
  const auto back = j.get<clf::ClsMetrics>();
  EXPECT_EQ(nlohmann::json(back).dump(), j.dump());
}

TEST(ClsMetrics, SliceHygiene) {
  std::vector<corpus::Record> recs = {{0, {5}, corpus::Provenance::real, corpus::Split::test},
                                      {1, {6}, corpus::Provenance::synthetic, corpus::Split::test}};
  EXPECT_THROW(clf::require_real_slice(ptrs(recs), "t"), std::logic_error);
  EXPECT_THROW(clf::require_real_slice({}, "t"), std::invalid_argument);
  EXPECT_THROW(clf::compute_metrics(std::vector<int>{}, std::vector<int>{}, 2), std::invalid_argument);
}

TEST(NaiveBayes, HandFixture) {
  // vocabulary {good = 0, bad = 1}; d1 = "good good" pos, d2 = "bad" neg
  const std::vector<corpus::SparseRow> x = {counts_row({0, 0}), counts_row({1})};
  const std::vector<int> y = {0, 1};
  const auto m = clf::MLModel::train(clf::MLKind::naive_bayes, x, y, 2, 2, {});
  // theta_pos = (3/4, 1/4), theta_neg = (1/3, 2/3), equal priors
  const auto post = m.posterior(counts_row({0}));
  EXPECT_NEAR(post[0], 9.0 / 13.0, 1e-12);
  EXPECT_NEAR(post[1], 4.0 / 13.0, 1e-12);
  EXPECT_EQ(m.predict(counts_row({0})), 0);
  EXPECT_NEAR(m.log_likelihood(0, 0), std::log(0.75), 1e-15);
  EXPECT_NEAR(m.log_likelihood(1, 1), std::log(2.0 / 3.0), 1e-15);
}

TEST(NaiveBayes, MatchesEnumerationOracle) {
  std::mt19937_64 eng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(eng() % 2), vocab = 2 + static_cast<int>(eng() % 5);
    const std::size_t ndocs = static_cast<std::size_t>(k) + eng() % (6 - static_cast<std::uint64_t>(k));
    std::vector<std::vector<int>> docs(ndocs);
    std::vector<int> labels(ndocs);
    for (std::size_t d = 0; d < ndocs; ++d) {
      labels[d] = d < static_cast<std::size_t>(k) ? static_cast<int>(d) : static_cast<int>(eng() % static_cast<std::uint64_t>(k));
      const std::size_t len = 1 + eng() % 5;
      for (std::size_t i = 0; i < len; ++i) docs[d].push_back(static_cast<int>(eng() % static_cast<std::uint64_t>(vocab)));
    }
    std::vector<corpus::SparseRow> x;
    for (const auto& d : docs) x.push_back(counts_row(d));
    const auto m = clf::MLModel::train(clf::MLKind::naive_bayes, x, labels, static_cast<std::size_t>(k),
                                       static_cast<std::size_t>(vocab), {});
    std::vector<int> query;
    for (std::size_t i = 0; i < 1 + eng() % 4; ++i) query.push_back(static_cast<int>(eng() % static_cast<std::uint64_t>(vocab)));
    const auto got = m.posterior(counts_row(query));
    const auto want = oracle::nb_posterior(docs, labels, k, vocab, 1.0, query);
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      EXPECT_NEAR(got[c], want[c], 1e-12);
      sum += got[c];
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    for (int c = 0; c < k; ++c) {
      double row = 0.0;
      for (int t = 0; t < vocab; ++t) row += std::exp(m.log_likelihood(c, t));
      EXPECT_NEAR(row, 1.0, 1e-9);
    }
  }
}

TEST(LinearModels, SeparableToyFitsExactly) {
  std::vector<corpus::SparseRow> x;
  std::vector<int> y;
  separable_toy(x, y);
  for (auto kind : {clf::MLKind::logistic, clf::MLKind::svm}) {
    const auto m = clf::MLModel::train(kind, x, y, 2, 2, {});
    const auto pred = m.predict(x);
    EXPECT_EQ(clf::compute_metrics(y, pred, 2).accuracy, 1.0) << clf::to_string(kind);
  }
}

TEST(LinearModels, SeedFixesTheFit) {
  std::vector<corpus::SparseRow> x;
  std::vector<int> y;
  cluster_toy(x, y, 20, 15);
  clf::MLHyper h;
  h.seed = 4;
  const nlohmann::json a = clf::MLModel::train(clf::MLKind::logistic, x, y, 3, 4, h);
  const nlohmann::json b = clf::MLModel::train(clf::MLKind::logistic, x, y, 3, 4, h);
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(DecisionTree, DepthCapAndPurity) {
  std::vector<corpus::SparseRow> x;
  std::vector<int> y;
  std::mt19937_64 eng(16);
  for (int i = 0; i < 300; ++i) {
    std::vector<double> v(6);
    for (auto& e : v) e = eng() % 3 == 0 ? 0.0 : static_cast<double>(eng() % 100) / 100.0;
    x.push_back(dense_row(v));
    y.push_back(static_cast<int>(eng() % 3));
  }
  const auto full = clf::MLModel::train(clf::MLKind::tree, x, y, 3, 6, {});
  EXPECT_LE(full.tree().depth(), 12u);
  clf::MLHyper shallow;
  shallow.max_depth = 3;
  EXPECT_LE(clf::MLModel::train(clf::MLKind::tree, x, y, 3, 6, shallow).tree().depth(), 3u);

  std::vector<corpus::SparseRow> cx;
  std::vector<int> cy;
  cluster_toy(cx, cy, 30, 17);
  const auto sep = clf::MLModel::train(clf::MLKind::tree, cx, cy, 3, 4, {});
  EXPECT_EQ(clf::compute_metrics(cy, sep.predict(cx), 3).accuracy, 1.0);
}

TEST(AdaBoost, TrainingErrorNonIncreasingOnToySet) {
  std::vector<corpus::SparseRow> x;
  std::vector<int> y;
  separable_toy(x, y);
  const auto m = clf::MLModel::train(clf::MLKind::adaboost, x, y, 2, 2, {});
  ASSERT_GE(m.num_stages(), 1u);
  EXPECT_LE(m.num_stages(), 50u);
  double prev = 1.0;
  for (std::size_t s = 1; s <= m.num_stages(); ++s) {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < x.size(); ++i) wrong += m.predict_staged(x[i], s) != y[i];
    const double err = static_cast<double>(wrong) / static_cast<double>(x.size());
    EXPECT_LE(err, prev) << "stage " << s;
    prev = err;
  }
  EXPECT_EQ(prev, 0.0);
}

TEST(AdaBoost, SammeExponentialLossNonIncreasing) {
  // overlapping 3-category clusters: the 0-1 error may wobble, the
  // multi-class exponential loss with SAMME codes may not
  std::vector<corpus::SparseRow> x;
  std::vector<int> y;
  std::mt19937_64 eng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 240; ++i) {
    const int c = i % 3;
    std::vector<double> v = {u(eng), u(eng), u(eng), u(eng)};
    v[static_cast<std::size_t>(c)] += 0.6;
    x.push_back(dense_row(v));
    y.push_back(c);
  }
  const auto m = clf::MLModel::train(clf::MLKind::adaboost, x, y, 3, 4, {});
  ASSERT_GE(m.num_stages(), 2u);
  for (double a : m.stage_weights()) EXPECT_GT(a, 0.0);
  const double K = 3.0;
  // f accumulates beta_m * coded(T_m); loss_i = exp(-y_i . f / K)
  std::vector<std::vector<double>> f(x.size(), std::vector<double>(3, 0.0));
  double prev = static_cast<double>(x.size());
  for (std::size_t s = 0; s < m.num_stages(); ++s) {
    const double beta = (K - 1) * (K - 1) / K * m.stage_weights()[s];
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const int t = m.stumps()[s].predict(x[i]);
      for (int c = 0; c < 3; ++c) f[i][static_cast<std::size_t>(c)] += beta * (c == t ? 1.0 : -1.0 / (K - 1));
      double dot = 0.0;
      for (int c = 0; c < 3; ++c) dot += (c == y[i] ? 1.0 : -1.0 / (K - 1)) * f[i][static_cast<std::size_t>(c)];
      loss += std::exp(-dot / K);
    }
    EXPECT_LE(loss, prev * (1 + 1e-12)) << "stage " << s + 1;
    prev = loss;
  }
}

TEST(MLModel, RejectsSingleCategory) {
  const std::vector<corpus::SparseRow> x = {counts_row({0}), counts_row({1})};
  const std::vector<int> y = {1, 1};
  for (auto kind : {clf::MLKind::naive_bayes, clf::MLKind::logistic, clf::MLKind::svm, clf::MLKind::tree,
                    clf::MLKind::adaboost}) {
    EXPECT_THROW(clf::MLModel::train(kind, x, y, 2, 2, {}), std::invalid_argument);
  }
  EXPECT_THROW(clf::MLModel::train(clf::MLKind::naive_bayes, x, std::vector<int>{0}, 2, 2, {}), std::invalid_argument);
}

TEST(MLModel, JsonRoundTripPreservesScores) {
  std::vector<corpus::SparseRow> x;
  std::vector<int> y;
  cluster_toy(x, y, 15, 19);
  for (auto kind : {clf::MLKind::naive_bayes, clf::MLKind::logistic, clf::MLKind::svm, clf::MLKind::tree,
                    clf::MLKind::adaboost}) {
    const auto m = clf::MLModel::train(kind, x, y, 3, 4, {});
    const nlohmann::json j = m;
    const auto back = nlohmann::json::parse(j.dump()).get<clf::MLModel>();
    for (const auto& row : x) EXPECT_EQ(back.scores(row), m.scores(row)) << clf::to_string(kind);
  }
}

TEST(NNModel, OutputArityForEveryArchitecture) {
  for (auto arch : {clf::NNArch::rnn, clf::NNArch::gru, clf::NNArch::bilstm, clf::NNArch::cnn}) {
    const clf::NNModel m(arch, 20, 3, small_nn(), 1);
    const auto l = m.logits({{5, 6, 7}, {8}, {9, 10, 11, 12, 13}});
    EXPECT_EQ(l.dim(0), 3u);
    EXPECT_EQ(l.dim(1), 3u);
  }
}

TEST(NNModel, PaddingDoesNotLeakIntoRecurrentStates) {
  for (auto arch : {clf::NNArch::rnn, clf::NNArch::gru, clf::NNArch::bilstm}) {
    const clf::NNModel m(arch, 20, 2, small_nn(), 2);
    const auto alone = m.logits({{5, 6}});
    const auto batched = m.logits({{5, 6}, {7, 8, 9, 10, 11, 12}});
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(alone.at(j), batched.at(j), 1e-12) << clf::to_string(arch);
  }
}

TEST(TrainNN, CnnSeparatesDisjointLexicons) {
  const auto& f = small_fixture();
  const auto res = clf::train_nn(clf::NNArch::cnn, f.data.in_split(corpus::Split::train), f.data.in_split(corpus::Split::val),
                                 f.vocab.size(), 3, small_nn());
  ASSERT_LE(res.curve.val_accuracy.size(), 5u);
  EXPECT_GE(*std::max_element(res.curve.val_accuracy.begin(), res.curve.val_accuracy.end()), 0.95);
  const auto test = clf::evaluate(res.model, f.data.in_split(corpus::Split::test));
  EXPECT_GE(test.accuracy, 0.9);
}

TEST(TrainNN, FixedSeedGivesIdenticalCurve) {
  const auto& f = small_fixture();
  auto h = small_nn();
  h.max_epochs = 2;
  const auto a = clf::train_nn(clf::NNArch::gru, f.data.in_split(corpus::Split::train), f.data.in_split(corpus::Split::val),
                               f.vocab.size(), 3, h);
  const auto b = clf::train_nn(clf::NNArch::gru, f.data.in_split(corpus::Split::train), f.data.in_split(corpus::Split::val),
                               f.vocab.size(), 3, h);
  EXPECT_EQ(a.curve.train_loss, b.curve.train_loss);
  EXPECT_EQ(a.curve.val_macro_f1, b.curve.val_macro_f1);
}

TEST(TrainNN, BiLstmIsSymmetricUnderReversal) {
  const auto& f = small_fixture();
  auto reversed = f.data;
  for (auto& r : reversed.records) std::reverse(r.tokens.begin(), r.tokens.end());
  auto h = small_nn();
  h.max_epochs = 4;
  const auto fwd = clf::train_nn(clf::NNArch::bilstm, f.data.in_split(corpus::Split::train),
                                 f.data.in_split(corpus::Split::val), f.vocab.size(), 3, h);
  const auto rev = clf::train_nn(clf::NNArch::bilstm, reversed.in_split(corpus::Split::train),
                                 reversed.in_split(corpus::Split::val), f.vocab.size(), 3, h);
  const double a = clf::evaluate(fwd.model, f.data.in_split(corpus::Split::test)).accuracy;
  const double b = clf::evaluate(rev.model, reversed.in_split(corpus::Split::test)).accuracy;
  EXPECT_LE(std::abs(a - b), 0.02) << a << " vs " << b;
}

TEST(TrainNN, EarlyStoppingKeepsBestEpoch) {
  const auto& f = small_fixture();
  auto h = small_nn();
  h.max_epochs = 12;
  h.patience = 1;
  h.d_h = 8;
  const auto val = f.data.in_split(corpus::Split::val);
  const auto res = clf::train_nn(clf::NNArch::rnn, f.data.in_split(corpus::Split::train), val, f.vocab.size(), 3, h);
  const auto& c = res.curve;
  EXPECT_EQ(c.val_macro_f1[c.best_epoch], *std::max_element(c.val_macro_f1.begin(), c.val_macro_f1.end()));
  EXPECT_LE(c.val_macro_f1.size(), c.best_epoch + 1 + h.patience);
  std::vector<int> truth;
  for (const auto* r : val) truth.push_back(r->label);
  EXPECT_EQ(clf::compute_metrics(truth, res.model.predict(val), 3).macro_f1, c.val_macro_f1[c.best_epoch]);
}

TEST(TrainNN, RejectsSyntheticValidation) {
  const auto& f = small_fixture();
  auto tainted = f.data;
  for (auto& r : tainted.records) {
    if (r.split == corpus::Split::val) {
      r.provenance = corpus::Provenance::synthetic;
      break;
    }
  }
  EXPECT_THROW(clf::train_nn(clf::NNArch::cnn, tainted.in_split(corpus::Split::train), tainted.in_split(corpus::Split::val),
                             f.vocab.size(), 3, small_nn()),
               std::logic_error);
}

TEST(NNModel, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "sentclass_nn_io";
  std::filesystem::create_directories(dir);
  const clf::NNModel m(clf::NNArch::bilstm, 30, 3, small_nn(), 9);
  m.save(dir / "m.catg");
  const auto back = clf::NNModel::load(dir / "m.catg");
  const std::vector<std::vector<int>> seqs = {{5, 6, 7}, {8, 29}};
  const auto a = m.logits(seqs), b = back.logits(seqs);
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(a.at(i), b.at(i));
  EXPECT_THROW(clf::NNModel::load(dir / "missing.catg"), sentiaug::num::CheckpointError);
  std::filesystem::remove_all(dir);
}

TEST(Classifier, FitEvaluateSaveLoadForBothFamilies) {
  const auto& f = small_fixture();
  const auto dir = std::filesystem::temp_directory_path() / "sentclass_clf_io";
  std::filesystem::create_directories(dir);
  clf::ClassifierHyper h;
  h.nn = small_nn();
  h.nn.max_epochs = 2;
  const auto test = f.data.in_split(corpus::Split::test);
  for (const std::string id : {"nb", "adaboost", "cnn"}) {
    const auto c = clf::Classifier::fit(id, f.data, f.vocab.size(), h, 5);
    const auto m = c.evaluate(test);
    EXPECT_EQ(m.total(), test.size());
    EXPECT_GT(m.accuracy, 0.6) << id;
    c.save(dir / id);
    const auto back = clf::Classifier::load(dir / id);
    EXPECT_EQ(back.id(), id);
    EXPECT_EQ(back.predict(test), c.predict(test)) << id;
  }
  std::filesystem::remove_all(dir);
}

TEST(Classifier, ModelIdsAndArms) {
  EXPECT_EQ(clf::all_model_ids().size(), 9u);
  EXPECT_FALSE(clf::is_neural("svm"));
  EXPECT_TRUE(clf::is_neural("gru"));
  EXPECT_THROW(clf::is_neural("knn"), std::invalid_argument);
  clf::MetricRecord r{"cnn", "fixture", clf::Arm::duplicated, 7, clf::metrics_from_confusion({{1, 0}, {0, 1}})};
  const nlohmann::json j = r;
  EXPECT_EQ(j.at("arm"), "duplicated");
  EXPECT_EQ(nlohmann::json(j.get<clf::MetricRecord>()).dump(), j.dump());
}
