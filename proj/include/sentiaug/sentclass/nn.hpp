#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sentiaug/corpus/labeled.hpp"
#include "sentiaug/numerics/optim.hpp"
#include "sentiaug/sentclass/metrics.hpp"

namespace sentiaug::clf {

using num::ParameterList;
using num::Tensor;

enum class NNArch { rnn, gru, bilstm, cnn };

std::string to_string(NNArch a);
NNArch parse_nn_arch(const std::string& s);

struct NNHyper {
  std::size_t d_emb = 64;
  std::size_t d_h = 64;
  std::size_t filters = 64;
  std::vector<std::size_t> widths = {3, 4, 5};
  std::size_t max_len = 64;  // longer inputs are truncated; CNN inputs are padded to this length
  std::size_t max_epochs = 10;
  std::size_t batch_size = 32;
  std::size_t patience = 3;
  double lr = 2e-3;
  double init_scale = 0.08;
  double max_grad_norm = 5.0;
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const NNHyper& h);
void from_json(const nlohmann::json& j, NNHyper& h);

class NNModel {
 public:
  NNModel(NNArch arch, std::size_t vocab_size, std::size_t num_categories, NNHyper hyper, std::uint64_t init_seed);

  NNArch arch() const { return arch_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t num_categories() const { return k_; }
  const NNHyper& hyper() const { return hyper_; }

  // [B, k]
  Tensor logits(const std::vector<std::vector<int>>& seqs) const;
  std::vector<int> predict(const std::vector<std::vector<int>>& seqs) const;
  std::vector<int> predict(const std::vector<const corpus::Record*>& records) const;

  ParameterList parameters(const std::string& prefix = "") const;
  NNModel clone() const;

  // CATG parameters at `path`, architecture in `path`.json.
  void save(const std::filesystem::path& path) const;
  static NNModel load(const std::filesystem::path& path);

 private:
  struct Cell {
    Tensor wx, wh, b;
  };
  Tensor final_state(const Cell& cell, std::size_t gates, const std::vector<std::vector<int>>& seqs) const;
  Tensor conv_features(const std::vector<std::vector<int>>& seqs) const;

  NNArch arch_;
  std::size_t vocab_size_;
  std::size_t k_;
  NNHyper hyper_;
  Tensor emb_;
  Cell fwd_;
  Cell bwd_;
  Tensor gru_bh_;
  std::vector<Tensor> conv_w_;
  std::vector<Tensor> conv_b_;
  Tensor out_w_;
  Tensor out_b_;
};

struct LearningCurve {
  std::vector<double> train_loss;
  std::vector<double> val_accuracy;
  std::vector<double> val_macro_f1;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

void to_json(nlohmann::json& j, const LearningCurve& c);

struct NNTrainResult {
  NNModel model;
  LearningCurve curve;
};

// Cross-entropy with Adam; keeps the epoch with the best val macro-F1 and stops
// after `patience` epochs without improvement. val must be real-only.
NNTrainResult train_nn(NNArch arch, const std::vector<const corpus::Record*>& train,
                       const std::vector<const corpus::Record*>& val, std::size_t vocab_size,
                       std::size_t num_categories, const NNHyper& hyper);

ClsMetrics evaluate(const NNModel& model, const std::vector<const corpus::Record*>& test);

}  // namespace sentiaug::clf
