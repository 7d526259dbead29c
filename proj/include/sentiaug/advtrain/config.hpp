#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace sentiaug::train {

// Generator-loss variants used as CatGAN mutations.
enum class Mutation { nsgan, lsgan, ragan };
std::string to_string(Mutation m);
Mutation parse_mutation(const std::string& s);

enum class TemperatureDecay { exponential, linear, constant };
std::string to_string(TemperatureDecay d);
TemperatureDecay parse_decay(const std::string& s);

struct TrainConfig {
  std::size_t pretrain_epochs = 20;
  std::size_t adversarial_rounds = 50;
  std::size_t batch_size = 32;
  std::size_t rollout_count = 8;
  double pretrain_lr = 5e-3;
  double gen_lr = 1e-3;
  double disc_lr = 1e-3;
  double temperature_start = 2.0;
  double temperature_end = 0.5;
  TemperatureDecay decay = TemperatureDecay::exponential;
  std::vector<Mutation> mutations = {Mutation::nsgan, Mutation::lsgan, Mutation::ragan};
  double lambda_d = 0.05;
  std::size_t fitness_samples = 32;
  std::size_t eval_every = 5;    // 0 disables metric snapshots
  std::size_t eval_samples = 100;
  std::size_t bleu_n = 2;
  double max_grad_norm = 5.0;
  double divergence_limit = 1e3;
  std::uint64_t seed = 0;

  void validate() const;
  // Gumbel temperature for a round in [0, adversarial_rounds).
  double temperature(std::size_t round) const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

}  // namespace sentiaug::train
