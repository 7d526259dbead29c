#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sentiaug/corpus/labeled.hpp"

namespace sentiaug::clf {

struct ClsMetrics {
  double accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  // confusion[truth][predicted]
  std::vector<std::vector<std::size_t>> confusion;

  std::size_t num_categories() const { return confusion.size(); }
  std::size_t total() const;
};

// Empty denominators score 0; macro scores average over all k categories.
ClsMetrics metrics_from_confusion(std::vector<std::vector<std::size_t>> confusion);
ClsMetrics compute_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t num_categories);

// Throws std::invalid_argument on an empty slice and std::logic_error on a synthetic record.
void require_real_slice(const std::vector<const corpus::Record*>& slice, const char* what);

void to_json(nlohmann::json& j, const ClsMetrics& m);
void from_json(const nlohmann::json& j, ClsMetrics& m);

}  // namespace sentiaug::clf
