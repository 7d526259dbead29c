#include "sentiaug/advtrain/pretrain.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "sentiaug/genmetrics/metrics.hpp"
#include "sentiaug/numerics/autograd.hpp"
#include "sentiaug/numerics/optim.hpp"
#include "sentiaug/numerics/random.hpp"

namespace sentiaug::train {

namespace {
constexpr std::uint64_t kEpochStream = 0x9e7;
constexpr std::uint64_t kEvalStream = 0x9e8;
}  // namespace

std::vector<int> trained_categories(const gan::Generator& gen) {
  const auto& c = gen.config();
  if (c.conditioning == gan::Conditioning::instance) return {c.category};
  std::vector<int> out(c.num_categories);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
  return out;
}

double heldout_nll(const gan::Generator& gen, const GanData& data, const std::vector<int>& categories,
                   std::uint64_t seed) {
  double total = 0.0, tokens = 0.0;
  for (int c : categories) {
    const auto& seqs = data.heldout_or_train(c);
    if (seqs.empty()) continue;
    double n = 0.0;
    for (const auto& s : seqs) n += static_cast<double>(s.size());
    total += metrics::nll_gen(gen, c, seqs, num::derive_seed(seed, static_cast<std::uint64_t>(c))) * n;
    tokens += n;
  }
  if (tokens == 0.0) throw std::invalid_argument("heldout_nll: no sequences for the requested categories");
  return total / tokens;
}

PretrainResult pretrain_mle(gan::Generator& gen, const GanData& data, const TrainConfig& config) {
  config.validate();
  if (data.num_categories != gen.config().num_categories) {
    throw std::invalid_argument("pretrain_mle: data has " + std::to_string(data.num_categories) +
                                " categories, generator " + std::to_string(gen.config().num_categories));
  }
  const auto cats = trained_categories(gen);
  std::vector<std::pair<int, std::size_t>> items;
  for (int c : cats) {
    const auto& slice = data.train.at(static_cast<std::size_t>(c));
    if (slice.empty()) throw std::invalid_argument("pretrain_mle: no training sequences for category " + std::to_string(c));
    for (std::size_t i = 0; i < slice.size(); ++i) items.emplace_back(c, i);
  }

  PretrainResult result;
  const std::uint64_t eval_seed = num::derive_seed(config.seed, kEvalStream);
  result.curve.push_back(heldout_nll(gen, data, cats, eval_seed));
  if (config.pretrain_epochs == 0) return result;

  num::Adam opt(gen.parameters(), {.lr = config.pretrain_lr, .max_grad_norm = config.max_grad_norm});
  for (std::size_t epoch = 1; epoch <= config.pretrain_epochs; ++epoch) {
    num::Rng rng(num::derive_seed(config.seed, kEpochStream, epoch));
    std::shuffle(items.begin(), items.end(), rng.engine());
    for (std::size_t start = 0; start < items.size(); start += config.batch_size) {
      const std::size_t end = std::min(items.size(), start + config.batch_size);
      std::vector<int> bc;
      std::vector<Sequence> bs;
      for (std::size_t i = start; i < end; ++i) {
        bc.push_back(items[i].first);
        bs.push_back(data.train[static_cast<std::size_t>(items[i].first)][items[i].second]);
      }
      num::backward(gen.mle_loss(bc, bs, gen.init_state(bc, rng)));
      opt.step(config.divergence_limit);
    }
    result.curve.push_back(heldout_nll(gen, data, cats, eval_seed));
  }
  return result;
}

}  // namespace sentiaug::train
