#pragma once

#include <cstdint>
#include <vector>

#include "sentiaug/corpus/labeled.hpp"
#include "sentiaug/gantext/generator.hpp"

namespace sentiaug::train {

using Sequence = std::vector<int>;

// Generator targets (EOS-terminated, length-capped) grouped by category id.
struct GanData {
  std::size_t num_categories = 0;
  std::vector<std::vector<Sequence>> train;
  std::vector<std::vector<Sequence>> heldout;

  const std::vector<Sequence>& heldout_or_train(int category) const;
};

// Real train records feed `train`, real records of `heldout_split` feed `heldout`.
GanData make_gan_data(const corpus::LabeledCorpus& corpus, std::size_t max_len,
                      corpus::Split heldout_split = corpus::Split::val);

struct Snapshot {
  double bleu = 0.0;     // mean over categories
  double nll_gen = 0.0;  // token-weighted over categories
  double nll_div = 0.0;  // mean over categories
};

}  // namespace sentiaug::train
