#include "sentiaug/advtrain/config.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace sentiaug::train {

std::string to_string(Mutation m) {
  switch (m) {
    case Mutation::nsgan: return "nsgan";
    case Mutation::lsgan: return "lsgan";
    case Mutation::ragan: return "ragan";
  }
  return "?";
}

Mutation parse_mutation(const std::string& s) {
  if (s == "nsgan") return Mutation::nsgan;
  if (s == "lsgan") return Mutation::lsgan;
  if (s == "ragan") return Mutation::ragan;
  throw std::invalid_argument("unknown mutation '" + s + "' (expected nsgan, lsgan or ragan)");
}

std::string to_string(TemperatureDecay d) {
  switch (d) {
    case TemperatureDecay::exponential: return "exponential";
    case TemperatureDecay::linear: return "linear";
    case TemperatureDecay::constant: return "constant";
  }
  return "?";
}

TemperatureDecay parse_decay(const std::string& s) {
  if (s == "exponential") return TemperatureDecay::exponential;
  if (s == "linear") return TemperatureDecay::linear;
  if (s == "constant") return TemperatureDecay::constant;
  throw std::invalid_argument("unknown temperature decay '" + s + "'");
}

void TrainConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("TrainConfig: ") + what);
  };
  need(adversarial_rounds > 0, "adversarial_rounds must be positive");
  need(batch_size > 0, "batch_size must be positive");
  need(rollout_count > 0, "rollout_count must be positive");
  need(pretrain_lr > 0 && gen_lr > 0 && disc_lr > 0, "learning rates must be positive");
  need(temperature_start > 0 && temperature_end > 0, "temperatures must be positive");
  need(temperature_end <= temperature_start, "temperature_end must not exceed temperature_start");
  need(!mutations.empty(), "mutation set is empty");
  need(lambda_d >= 0, "lambda_d must be nonnegative");
  need(fitness_samples >= 32, "fitness_samples must be at least 32");
  need(eval_samples >= 100, "eval_samples must be at least 100");
  need(bleu_n >= 1, "bleu_n must be positive");
  need(divergence_limit > 0, "divergence_limit must be positive");
}

double TrainConfig::temperature(std::size_t round) const {
  if (decay == TemperatureDecay::constant || adversarial_rounds <= 1) return temperature_start;
  const double frac = static_cast<double>(std::min(round, adversarial_rounds - 1)) /
                      static_cast<double>(adversarial_rounds - 1);
  if (decay == TemperatureDecay::linear) return temperature_start + (temperature_end - temperature_start) * frac;
  return temperature_start * std::pow(temperature_end / temperature_start, frac);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  std::vector<std::string> muts;
  for (auto m : c.mutations) muts.push_back(to_string(m));
  j = {{"pretrain_epochs", c.pretrain_epochs},
       {"adversarial_rounds", c.adversarial_rounds},
       {"batch_size", c.batch_size},
       {"rollout_count", c.rollout_count},
       {"pretrain_lr", c.pretrain_lr},
       {"gen_lr", c.gen_lr},
       {"disc_lr", c.disc_lr},
       {"temperature_start", c.temperature_start},
       {"temperature_end", c.temperature_end},
       {"decay", to_string(c.decay)},
       {"mutations", muts},
       {"lambda_d", c.lambda_d},
       {"fitness_samples", c.fitness_samples},
       {"eval_every", c.eval_every},
       {"eval_samples", c.eval_samples},
       {"bleu_n", c.bleu_n},
       {"max_grad_norm", c.max_grad_norm},
       {"divergence_limit", c.divergence_limit},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  c.pretrain_epochs = j.value("pretrain_epochs", d.pretrain_epochs);
  c.adversarial_rounds = j.value("adversarial_rounds", d.adversarial_rounds);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.rollout_count = j.value("rollout_count", d.rollout_count);
  c.pretrain_lr = j.value("pretrain_lr", d.pretrain_lr);
  c.gen_lr = j.value("gen_lr", d.gen_lr);
  c.disc_lr = j.value("disc_lr", d.disc_lr);
  c.temperature_start = j.value("temperature_start", d.temperature_start);
  c.temperature_end = j.value("temperature_end", d.temperature_end);
  c.decay = parse_decay(j.value("decay", to_string(d.decay)));
  if (j.contains("mutations")) {
    c.mutations.clear();
    for (const auto& m : j.at("mutations")) c.mutations.push_back(parse_mutation(m.get<std::string>()));
  } else {
    c.mutations = d.mutations;
  }
  c.lambda_d = j.value("lambda_d", d.lambda_d);
  c.fitness_samples = j.value("fitness_samples", d.fitness_samples);
  c.eval_every = j.value("eval_every", d.eval_every);
  c.eval_samples = j.value("eval_samples", d.eval_samples);
  c.bleu_n = j.value("bleu_n", d.bleu_n);
  c.max_grad_norm = j.value("max_grad_norm", d.max_grad_norm);
  c.divergence_limit = j.value("divergence_limit", d.divergence_limit);
  c.seed = j.value("seed", d.seed);
}

}  // namespace sentiaug::train
