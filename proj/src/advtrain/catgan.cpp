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

constexpr std::uint64_t kRoundStream = 0xca76;
constexpr std::uint64_t kSnapshotStream = 0xca77;

}  // namespace

CatganTrainer::CatganTrainer(gan::Generator generator, gan::Discriminator disc, TrainConfig config)
    : gen_(std::move(generator)),
      disc_(std::move(disc)),
      cfg_(std::move(config)),
      gen_opt_(gen_.parameters(), {.lr = cfg_.gen_lr, .max_grad_norm = cfg_.max_grad_norm}),
      disc_opt_(disc_.parameters(), {.lr = cfg_.disc_lr, .max_grad_norm = cfg_.max_grad_norm}) {
  cfg_.validate();
  if (gen_.config().conditioning != gan::Conditioning::embedding) {
    throw std::invalid_argument("CatganTrainer: generator must use category embedding conditioning");
  }
  if (disc_.config().head != gan::DiscHead::catgan || disc_.config().num_categories != gen_.config().num_categories) {
    throw std::invalid_argument("CatganTrainer: discriminator must have one real/fake head per generator category");
  }
}

RoundRecord CatganTrainer::run_round(const GanData& data) {
  const std::size_t k = gen_.config().num_categories, B = cfg_.batch_size;
  if (data.num_categories != k) throw std::invalid_argument("CatganTrainer: category count mismatch");
  for (std::size_t c = 0; c < k; ++c)
    if (data.train[c].empty()) throw std::invalid_argument("no training sequences for category " + std::to_string(c));

  RoundRecord rec;
  rec.round = history_.size();
  rec.temperature = cfg_.temperature(rec.round);
  num::Rng rng(num::derive_seed(cfg_.seed, kRoundStream, rec.round));

  std::vector<int> cats(B);
  std::vector<Sequence> real;
  for (std::size_t b = 0; b < B; ++b) {
    cats[b] = static_cast<int>(b % k);
    const auto& slice = data.train[b % k];
    real.push_back(slice[rng.index(slice.size())]);
  }
  num::Tensor real_logits;
  {
    num::NoGradGuard no_grad;
    real_logits = num::pick(disc_.logits(real), cats);
  }
  const std::uint64_t sample_seed = rng.engine()();
  const std::uint64_t fitness_seed = rng.engine()();

  std::vector<gan::Generator> children;
  std::vector<num::Adam> opts;
  std::vector<Fitness> scores;
  std::vector<double> losses;
  for (Mutation m : cfg_.mutations) {
    gan::Generator child = gen_.clone();
    num::Adam opt = gen_opt_.rebind(child.parameters());
    const auto batch = child.sample_batch(cats, {gan::SampleMode::gumbel_st, rec.temperature}, sample_seed);
    const num::Tensor loss = generator_loss(m, num::pick(disc_.logits_soft(batch.hard), cats), real_logits);
    losses.push_back(loss.item());
    opt.zero_grad();
    num::backward(loss);
    const bool applied = opt.step(cfg_.divergence_limit).applied;
    disc_opt_.zero_grad();
    scores.push_back(evaluate_fitness(child, disc_, cfg_.fitness_samples, cfg_.lambda_d, fitness_seed));
    rec.candidates.push_back({m, scores.back(), !applied});
    children.push_back(std::move(child));
    opts.push_back(std::move(opt));
  }
  const std::size_t pick = select_candidate(scores);
  rec.selected = static_cast<int>(pick);
  rec.g_loss = losses[pick];
  gen_ = std::move(children[pick]);
  gen_opt_ = std::move(opts[pick]);
  if (rec.candidates[pick].aborted) rec.aborted = true;

  if (!rec.aborted) {
    std::vector<Sequence> fake;
    for (auto& s : gen_.sample_batch(cats, {gan::SampleMode::multinomial}, rng.engine()()).seqs)
      fake.push_back(std::move(s.tokens));
    disc_opt_.zero_grad();
    const num::Tensor dl = head_loss(num::pick(disc_.logits(real), cats), num::pick(disc_.logits(fake), cats));
    rec.d_loss = dl.item();
    num::backward(dl);
    if (!disc_opt_.step(cfg_.divergence_limit).applied) rec.aborted = true;
  }

  if (cfg_.eval_every && (rec.round + 1) % cfg_.eval_every == 0) {
    const auto s = snapshot([this](int) -> const gan::Generator& { return gen_; }, data, cfg_,
                            num::derive_seed(cfg_.seed, kSnapshotStream, rec.round));
    rec.bleu = s.bleu;
    rec.nll_gen = s.nll_gen;
    rec.nll_div = s.nll_div;
  }
  history_.push_back(rec);
  return rec;
}

std::vector<RoundRecord> CatganTrainer::train(const GanData& data, std::optional<std::size_t> rounds,
                                              const RoundCallback& on_round) {
  const std::size_t n = rounds.value_or(cfg_.adversarial_rounds > rounds_done() ? cfg_.adversarial_rounds - rounds_done() : 0);
  std::vector<RoundRecord> out;
  for (std::size_t r = 0; r < n; ++r) {
    out.push_back(run_round(data));
    if (on_round) on_round(out.back());
  }
  return out;
}

void CatganTrainer::save(const std::filesystem::path& path) const {
  num::ParameterList all = gen_.parameters("gen/");
  for (auto& t : gen_opt_.state_tensors("opt/gen/")) all.push_back(t);
  for (auto& t : disc_.parameters("disc/")) all.push_back(t);
  for (auto& t : disc_opt_.state_tensors("opt/disc/")) all.push_back(t);
  io::write_bundle(path, "catgan",
                   {{"train", cfg_},
                    {"generator", io::generator_config_json(gen_.config())},
                    {"discriminator", io::discriminator_config_json(disc_.config())},
                    {"history", io::history_json(history_)}},
                   all);
}

CatganTrainer CatganTrainer::load(const std::filesystem::path& path) {
  auto [meta, saved] = io::read_bundle(path, "catgan");
  CatganTrainer t(gan::Generator(io::generator_config_from(meta.at("generator")), 0),
                  gan::Discriminator(io::discriminator_config_from(meta.at("discriminator")), 0),
                  meta.at("train").get<TrainConfig>());
  num::restore_parameters(saved, t.gen_.parameters("gen/"));
  t.gen_opt_.load_state(saved, "opt/gen/");
  num::restore_parameters(saved, t.disc_.parameters("disc/"));
  t.disc_opt_.load_state(saved, "opt/disc/");
  t.history_ = io::history_from(meta.at("history"));
  return t;
}

}  // namespace sentiaug::train
