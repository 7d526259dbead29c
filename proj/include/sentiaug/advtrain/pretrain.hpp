#pragma once

#include <vector>

#include "sentiaug/advtrain/config.hpp"
#include "sentiaug/advtrain/data.hpp"
#include "sentiaug/gantext/generator.hpp"

namespace sentiaug::train {

struct PretrainResult {
  // curve[0] is the held-out NLL before training, curve[e] after epoch e.
  std::vector<double> curve;
};

// Teacher-forced MLE with Adam on the generator's own category (instance
// conditioning) or on every category (embedding conditioning).
PretrainResult pretrain_mle(gan::Generator& gen, const GanData& data, const TrainConfig& config);

// Token-weighted mean of nll_gen over the given categories' held-out slices.
double heldout_nll(const gan::Generator& gen, const GanData& data, const std::vector<int>& categories,
                   std::uint64_t seed);

std::vector<int> trained_categories(const gan::Generator& gen);

}  // namespace sentiaug::train
