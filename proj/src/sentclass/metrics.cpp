#include "sentiaug/sentclass/metrics.hpp"

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace sentiaug::clf {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::size_t ClsMetrics::total() const {
  std::size_t n = 0;
  for (const auto& row : confusion)
    for (std::size_t c : row) n += c;
  return n;
}

ClsMetrics metrics_from_confusion(std::vector<std::vector<std::size_t>> confusion) {
  const std::size_t k = confusion.size();
  if (k == 0) throw std::invalid_argument("metrics_from_confusion: no categories");
  for (const auto& row : confusion) {
    if (row.size() != k) throw std::invalid_argument("metrics_from_confusion: confusion matrix not square");
  }
  ClsMetrics m;
  m.confusion = std::move(confusion);
  m.precision.assign(k, 0.0);
  m.recall.assign(k, 0.0);
  m.f1.assign(k, 0.0);
  std::size_t correct = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t predicted = 0, actual = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += m.confusion[o][c];
      actual += m.confusion[c][o];
    }
    const std::size_t tp = m.confusion[c][c];
    correct += tp;
    m.precision[c] = ratio(tp, predicted);
    m.recall[c] = ratio(tp, actual);
    const double pr = m.precision[c] + m.recall[c];
    m.f1[c] = pr == 0.0 ? 0.0 : 2.0 * m.precision[c] * m.recall[c] / pr;
    m.macro_precision += m.precision[c];
    m.macro_recall += m.recall[c];
    m.macro_f1 += m.f1[c];
  }
  const double kd = static_cast<double>(k);
  m.macro_precision /= kd;
  m.macro_recall /= kd;
  m.macro_f1 /= kd;
  m.accuracy = ratio(correct, m.total());
  return m;
}

ClsMetrics compute_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t num_categories) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("compute_metrics: length mismatch");
  if (truth.empty()) throw std::invalid_argument("compute_metrics: empty test slice");
  std::vector<std::vector<std::size_t>> confusion(num_categories, std::vector<std::size_t>(num_categories, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predicted[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= num_categories ||
        static_cast<std::size_t>(p) >= num_categories) {
      throw std::out_of_range("compute_metrics: category id out of range");
    }
    ++confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return metrics_from_confusion(std::move(confusion));
}

void require_real_slice(const std::vector<const corpus::Record*>& slice, const char* what) {
  if (slice.empty()) throw std::invalid_argument(std::string(what) + ": empty slice");
  for (const auto* r : slice) {
    if (r->provenance != corpus::Provenance::real) {
      throw std::logic_error(std::string(what) + ": slice contains a synthetic record");
    }
  }
}

void to_json(nlohmann::json& j, const ClsMetrics& m) {
  j = nlohmann::json{{"accuracy", m.accuracy},
                     {"precision", m.precision},
                     {"recall", m.recall},
                     {"f1", m.f1},
                     {"macro_precision", m.macro_precision},
                     {"macro_recall", m.macro_recall},
                     {"macro_f1", m.macro_f1},
                     {"confusion", m.confusion}};
}

void from_json(const nlohmann::json& j, ClsMetrics& m) {
  m = metrics_from_confusion(j.at("confusion").get<std::vector<std::vector<std::size_t>>>());
}

}  // namespace sentiaug::clf
