#include <stdexcept>
#include <string>

#include "bundle_io.hpp"
#include "sentiaug/advtrain/adversarial.hpp"
#include "sentiaug/numerics/autograd.hpp"
#include "sentiaug/numerics/checkpoint.hpp"
#include "sentiaug/numerics/ops.hpp"
#include "sentiaug/numerics/random.hpp"

namespace sentiaug::train {

namespace {

constexpr std::uint64_t kRoundStream = 0x5e47;
constexpr std::uint64_t kSnapshotStream = 0x5e48;

std::vector<num::Adam> make_gen_opts(const std::vector<gan::Generator>& gens, const TrainConfig& cfg) {
  std::vector<num::Adam> out;
  for (const auto& g : gens) out.emplace_back(g.parameters(), num::AdamConfig{.lr = cfg.gen_lr, .max_grad_norm = cfg.max_grad_norm});
  return out;
}

void check_data(const GanData& data, std::size_t k) {
  if (data.num_categories != k) {
    throw std::invalid_argument("GAN data has " + std::to_string(data.num_categories) + " categories, models " +
                                std::to_string(k));
  }
  for (std::size_t c = 0; c < k; ++c)
    if (data.train[c].empty()) throw std::invalid_argument("no training sequences for category " + std::to_string(c));
}

}  // namespace

SentiganTrainer::SentiganTrainer(std::vector<gan::Generator> generators, gan::Discriminator disc, TrainConfig config)
    : gens_(std::move(generators)),
      disc_(std::move(disc)),
      cfg_(std::move(config)),
      gen_opts_(make_gen_opts(gens_, cfg_)),
      disc_opt_(disc_.parameters(), {.lr = cfg_.disc_lr, .max_grad_norm = cfg_.max_grad_norm}) {
  cfg_.validate();
  const std::size_t k = gens_.size();
  if (k < 2) throw std::invalid_argument("SentiganTrainer: needs at least 2 generators");
  for (std::size_t i = 0; i < k; ++i) {
    const auto& gc = gens_[i].config();
    if (gc.conditioning != gan::Conditioning::instance || gc.category != static_cast<int>(i) ||
        gc.num_categories != k) {
      throw std::invalid_argument("SentiganTrainer: generator " + std::to_string(i) +
                                  " must be an instance generator for category " + std::to_string(i) + " of " +
                                  std::to_string(k));
    }
  }
  if (disc_.config().head != gan::DiscHead::sentigan || disc_.config().num_categories != k) {
    throw std::invalid_argument("SentiganTrainer: discriminator must be a (k+1)-way head over " + std::to_string(k) +
                                " categories");
  }
}

void SentiganTrainer::discriminator_step(const GanData& data, num::Rng& rng, RoundRecord& rec) {
  const std::size_t k = gens_.size(), B = cfg_.batch_size;
  std::vector<Sequence> seqs;
  std::vector<int> labels;
  for (std::size_t b = 0; b < B; ++b) {
    const auto& slice = data.train[b % k];
    seqs.push_back(slice[rng.index(slice.size())]);
    labels.push_back(static_cast<int>(b % k));
  }
  const std::size_t per_gen = std::max<std::size_t>(1, B / k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::vector<int> cats(per_gen, static_cast<int>(i));
    for (auto& s : gens_[i].sample_batch(cats, {gan::SampleMode::multinomial}, rng.engine()()).seqs) {
      seqs.push_back(std::move(s.tokens));
      labels.push_back(static_cast<int>(k));
    }
  }
  disc_opt_.zero_grad();
  const num::Tensor loss = num::cross_entropy(disc_.logits(seqs), labels);
  rec.d_loss = loss.item();
  num::backward(loss);
  if (!disc_opt_.step(cfg_.divergence_limit).applied) rec.aborted = true;
}

void SentiganTrainer::generator_steps(num::Rng& rng, RoundRecord& rec) {
  const std::size_t B = cfg_.batch_size;
  double penalty_sum = 0.0, loss_sum = 0.0;
  std::size_t penalty_n = 0, stepped = 0;
  for (std::size_t i = 0; i < gens_.size() && !rec.aborted; ++i) {
    const std::vector<int> cats(B, static_cast<int>(i));
    const auto batch = gens_[i].sample_batch(cats, {gan::SampleMode::multinomial, 1.0, 0, true}, rng.engine()());
    const SequenceScorer scorer = [&](const std::vector<Sequence>& seqs) {
      std::vector<double> d;
      for (const auto& row : disc_.probabilities(seqs)) d.push_back(row[i]);
      return d;
    };
    const auto pen = estimate_penalties(gens_[i], cats, batch, cfg_.rollout_count, scorer, rng);
    std::vector<Sequence> seqs;
    std::vector<std::vector<double>> weights;
    for (std::size_t b = 0; b < B; ++b) {
      seqs.push_back(batch.seqs[b].tokens);
      std::vector<double> w;
      for (double p : pen.per_step[b]) {
        w.push_back(-p / static_cast<double>(B));
        penalty_sum += p;
        ++penalty_n;
      }
      weights.push_back(std::move(w));
    }
    gen_opts_[i].zero_grad();
    const num::Tensor loss = gens_[i].weighted_nll(cats, seqs, weights, batch.init);
    loss_sum += loss.item();
    ++stepped;
    num::backward(loss);
    if (!gen_opts_[i].step(cfg_.divergence_limit).applied) rec.aborted = true;
  }
  if (penalty_n) rec.penalty_mean = penalty_sum / static_cast<double>(penalty_n);
  if (stepped) rec.g_loss = loss_sum / static_cast<double>(stepped);
}

RoundRecord SentiganTrainer::run_round(const GanData& data) {
  check_data(data, gens_.size());
  RoundRecord rec;
  rec.round = history_.size();
  num::Rng rng(num::derive_seed(cfg_.seed, kRoundStream, rec.round));
  discriminator_step(data, rng, rec);
  if (!rec.aborted) generator_steps(rng, rec);
  if (cfg_.eval_every && (rec.round + 1) % cfg_.eval_every == 0) {
    const auto s = snapshot([this](int c) -> const gan::Generator& { return gens_[static_cast<std::size_t>(c)]; },
                            data, cfg_, num::derive_seed(cfg_.seed, kSnapshotStream, rec.round));
    rec.bleu = s.bleu;
    rec.nll_gen = s.nll_gen;
    rec.nll_div = s.nll_div;
  }
  history_.push_back(rec);
  return rec;
}

std::vector<RoundRecord> SentiganTrainer::train(const GanData& data, std::optional<std::size_t> rounds,
                                                const RoundCallback& on_round) {
  const std::size_t n = rounds.value_or(cfg_.adversarial_rounds > rounds_done() ? cfg_.adversarial_rounds - rounds_done() : 0);
  std::vector<RoundRecord> out;
  for (std::size_t r = 0; r < n; ++r) {
    out.push_back(run_round(data));
    if (on_round) on_round(out.back());
  }
  return out;
}

void SentiganTrainer::save(const std::filesystem::path& path) const {
  num::ParameterList all;
  nlohmann::json gens = nlohmann::json::array();
  for (std::size_t i = 0; i < gens_.size(); ++i) {
    const std::string p = "gen" + std::to_string(i) + "/";
    for (auto& t : gens_[i].parameters(p)) all.push_back(t);
    for (auto& t : gen_opts_[i].state_tensors("opt/" + p)) all.push_back(t);
    gens.push_back(io::generator_config_json(gens_[i].config()));
  }
  for (auto& t : disc_.parameters("disc/")) all.push_back(t);
  for (auto& t : disc_opt_.state_tensors("opt/disc/")) all.push_back(t);
  io::write_bundle(path, "sentigan",
                   {{"train", cfg_},
                    {"generators", gens},
                    {"discriminator", io::discriminator_config_json(disc_.config())},
                    {"history", io::history_json(history_)}},
                   all);
}

SentiganTrainer SentiganTrainer::load(const std::filesystem::path& path) {
  auto [meta, saved] = io::read_bundle(path, "sentigan");
  std::vector<gan::Generator> gens;
  for (const auto& g : meta.at("generators")) gens.emplace_back(io::generator_config_from(g), 0);
  gan::Discriminator disc(io::discriminator_config_from(meta.at("discriminator")), 0);
  SentiganTrainer t(std::move(gens), std::move(disc), meta.at("train").get<TrainConfig>());
  for (std::size_t i = 0; i < t.gens_.size(); ++i) {
    const std::string p = "gen" + std::to_string(i) + "/";
    num::restore_parameters(saved, t.gens_[i].parameters(p));
    t.gen_opts_[i].load_state(saved, "opt/" + p);
  }
  num::restore_parameters(saved, t.disc_.parameters("disc/"));
  t.disc_opt_.load_state(saved, "opt/disc/");
  t.history_ = io::history_from(meta.at("history"));
  return t;
}

std::string checkpoint_kind(const std::filesystem::path& path) {
  return io::read_bundle(path, "").first.at("kind").get<std::string>();
}

}  // namespace sentiaug::train
