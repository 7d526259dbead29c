#include "sentiaug/expcli/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sentiaug/advtrain/adversarial.hpp"
#include "sentiaug/advtrain/pretrain.hpp"
#include "sentiaug/corpus/dataset.hpp"
#include "sentiaug/corpus/synth.hpp"
#include "sentiaug/numerics/random.hpp"

namespace sentiaug::exp {

namespace {

constexpr std::uint64_t kDataStream = 0xda7a;
constexpr std::uint64_t kSplitStream = 0x5b17;
constexpr std::uint64_t kGanStream = 0x6a4;
constexpr std::uint64_t kGenerateStream = 0xba1a;
constexpr std::uint64_t kDuplicateStream = 0xd0b1;
constexpr std::uint64_t kMergeStream = 0x3e6;
constexpr std::uint64_t kClassifierStream = 0xc1a5;

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

std::vector<std::string> present_labels(const std::vector<std::string>& canonical, const std::vector<corpus::TextRecord>& recs) {
  std::vector<std::string> out;
  for (const auto& l : canonical) {
    if (std::any_of(recs.begin(), recs.end(), [&](const corpus::TextRecord& r) { return r.label == l; })) out.push_back(l);
  }
  return out;
}

bool same_slice(const corpus::LabeledCorpus& a, const corpus::LabeledCorpus& b, corpus::Split s) {
  const auto x = a.in_split(s), y = b.in_split(s);
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i]->label != y[i]->label || x[i]->tokens != y[i]->tokens || x[i]->provenance != y[i]->provenance) return false;
  }
  return true;
}

}  // namespace

StageError::StageError(std::string stage, const std::string& message)
    : std::runtime_error("stage " + stage + ": " + message), stage_(std::move(stage)) {}

nlohmann::json StageError::record() const {
  const std::string what = this->what();
  return {{"stage", stage_}, {"error", what.substr(what.find(": ") + 2)}};
}

PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t seed) {
  const auto& ds = config.dataset;
  PreparedData out;
  std::vector<text::RawRecord> raw;
  std::vector<std::string> canonical;
  if (ds.source == DataSource::csv) {
    auto loaded = corpus::load_dataset(ds.path, ds.schema);
    out.row_errors = loaded.errors.size();
    raw = std::move(loaded.records);
    canonical = corpus::LabelingRule::defaults(ds.schema).categories();
  } else {
    raw = corpus::synth_corpus(ds.synthetic, num::derive_seed(seed, kDataStream));
    for (const auto& c : ds.synthetic.categories) canonical.push_back(c.label);
  }
  out.raw_records = raw.size();

  text::Preprocessor prep(config.prep);
  std::vector<corpus::TextRecord> recs;
  for (const auto& r : raw) {
    if (auto toks = prep.preprocess(r)) recs.push_back({r.label, std::move(*toks), corpus::Provenance::real, corpus::Split::train});
  }
  out.drops = prep.drops();
  const auto labels = present_labels(canonical, recs);
  if (labels.size() < 2) throw std::invalid_argument("fewer than two categories survive preprocessing");

  // splits first, on a provisional encoding; the vocabulary then comes from the train split only
  std::vector<text::TokenList> all;
  for (const auto& r : recs) all.push_back(r.tokens);
  auto provisional = corpus::encode_corpus(recs, corpus::Vocab::build(all, SIZE_MAX), labels);
  corpus::assign_splits(provisional, ds.splits, num::derive_seed(seed, kSplitStream), ds.stratified);
  std::vector<text::TokenList> train_streams;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].split = provisional.records[i].split;
    if (recs[i].split == corpus::Split::train) train_streams.push_back(recs[i].tokens);
  }
  out.vocab = corpus::Vocab::build(train_streams, ds.vocab_max, ds.vocab_min_freq);
  out.corpus = corpus::encode_corpus(recs, out.vocab, labels);
  out.corpus.validate(out.vocab.size());
  return out;
}

void write_prepared(const std::filesystem::path& dir, const PreparedData& data) {
  std::filesystem::create_directories(dir);
  corpus::write_jsonl(dir / "corpus.jsonl", corpus::decode_corpus(data.corpus, data.vocab));
  write_json(dir / "vocab.json", data.vocab.to_json());
  write_json(dir / "labels.json", data.corpus.label_names);
}

PreparedData read_prepared(const std::filesystem::path& dir) {
  PreparedData out;
  out.vocab = corpus::Vocab::from_json(read_json(dir / "vocab.json"));
  const auto labels = read_json(dir / "labels.json").get<std::vector<std::string>>();
  out.corpus = corpus::encode_corpus(corpus::read_jsonl(dir / "corpus.jsonl"), out.vocab, labels);
  out.corpus.validate(out.vocab.size());
  out.raw_records = out.corpus.records.size();
  return out;
}

GanResult load_gan(const std::filesystem::path& checkpoint) {
  GanResult out;
  out.loaded = true;
  if (train::checkpoint_kind(checkpoint) == "sentigan") {
    auto t = train::SentiganTrainer::load(checkpoint);
    out.bundle = balance::GeneratorBundle::per_category(t.generators());
    out.history = t.history();
  } else {
    auto t = train::CatganTrainer::load(checkpoint);
    out.bundle = balance::GeneratorBundle::shared(t.generator());
    out.history = t.history();
  }
  return out;
}

GanResult train_gan(const ExperimentConfig& config, const PreparedData& data, std::uint64_t seed,
                    const std::optional<std::filesystem::path>& save_to) {
  if (config.gan.checkpoint && std::filesystem::exists(*config.gan.checkpoint)) {
    spdlog::info("stage=gan seed={} action=load checkpoint={}", seed, config.gan.checkpoint->string());
    return load_gan(*config.gan.checkpoint);
  }
  const std::size_t V = data.vocab.size(), k = data.corpus.num_categories();
  gan::GeneratorConfig gc = config.gan.generator;
  gc.vocab_size = V;
  gc.num_categories = k;
  gan::DiscriminatorConfig dc;
  dc.trunk = config.gan.discriminator;
  dc.trunk.vocab_size = V;
  dc.trunk.max_len = gc.max_len;
  dc.num_categories = k;
  train::TrainConfig tc = config.gan.train;
  tc.seed = num::derive_seed(seed, kGanStream);
  const auto gdata = train::make_gan_data(data.corpus, gc.max_len);

  const auto log_round = [seed](const train::RoundRecord& r) {
    if (r.chosen()) {
      spdlog::info("stage=gan seed={} round={} temperature={:.4f} d_loss={:.4f} g_loss={:.4f} mutation={} fitness={:.4f} aborted={}",
                   seed, r.round, r.temperature, r.d_loss, r.g_loss, train::to_string(r.chosen()->mutation),
                   r.chosen()->fitness.F, r.aborted);
    } else {
      spdlog::info("stage=gan seed={} round={} d_loss={:.4f} g_loss={:.4f} penalty_mean={:.4f} aborted={}", seed, r.round,
                   r.d_loss, r.g_loss, r.penalty_mean, r.aborted);
    }
  };
  GanResult out;
  if (config.gan.kind == GanKind::sentigan) {
    std::vector<gan::Generator> gens;
    for (std::size_t c = 0; c < k; ++c) {
      auto g = gc;
      g.conditioning = gan::Conditioning::instance;
      g.category = static_cast<int>(c);
      g.noise_init = true;
      gens.emplace_back(g, num::derive_seed(tc.seed, 10 + c));
      out.pretrain_curves.push_back(train::pretrain_mle(gens.back(), gdata, tc).curve);
      spdlog::info("stage=pretrain seed={} category={} nll_start={:.4f} nll_end={:.4f}", seed, c,
                   out.pretrain_curves.back().front(), out.pretrain_curves.back().back());
    }
    dc.head = gan::DiscHead::sentigan;
    train::SentiganTrainer trainer(std::move(gens), gan::Discriminator(dc, num::derive_seed(tc.seed, 3)), tc);
    trainer.train(gdata, std::nullopt, log_round);
    if (save_to) trainer.save(*save_to);
    out.bundle = balance::GeneratorBundle::per_category(trainer.generators());
    out.history = trainer.history();
  } else {
    gc.conditioning = gan::Conditioning::embedding;
    gan::Generator g(gc, num::derive_seed(tc.seed, 20));
    out.pretrain_curves.push_back(train::pretrain_mle(g, gdata, tc).curve);
    spdlog::info("stage=pretrain seed={} nll_start={:.4f} nll_end={:.4f}", seed, out.pretrain_curves.back().front(),
                 out.pretrain_curves.back().back());
    dc.head = gan::DiscHead::catgan;
    train::CatganTrainer trainer(std::move(g), gan::Discriminator(dc, num::derive_seed(tc.seed, 4)), tc);
    trainer.train(gdata, std::nullopt, log_round);
    if (save_to) trainer.save(*save_to);
    out.bundle = balance::GeneratorBundle::shared(trainer.generator());
    out.history = trainer.history();
  }
  return out;
}

ArmData build_arm(clf::Arm arm, const ExperimentConfig& config, const PreparedData& data,
                  const balance::GeneratorBundle* bundle, std::uint64_t seed) {
  ArmData out;
  out.arm = arm;
  if (arm == clf::Arm::imbalanced) {
    out.corpus = data.corpus;
  } else {
    const auto plan = balance::compute_plan(corpus::class_stats(data.corpus, corpus::Split::train),
                                            balance::TargetPolicy::majority_match, config.balance.filters,
                                            config.balance.oversample_cap);
    std::vector<corpus::Record> extra;
    if (arm == clf::Arm::balanced) {
      if (!bundle) throw std::invalid_argument("balanced arm needs trained generators");
      auto gen = balance::generate_minority(*bundle, plan, data.corpus, num::derive_seed(seed, kGenerateStream),
                                            config.balance.attempts_per_record);
      out.balance_report = balance::plan_report_json(plan, gen.report);
      for (const auto& r : gen.report) {
        spdlog::info("stage=balance seed={} label={} requested={} accepted={} attempts={} shortfall={}", seed, r.label,
                     r.requested, r.accepted, r.attempts, r.shortfall);
      }
      extra = std::move(gen.records);
    } else {
      extra = balance::duplicate_minority(data.corpus, plan, num::derive_seed(seed, kDuplicateStream));
      std::vector<std::size_t> copies(plan.labels.size(), 0);
      for (const auto& r : extra) ++copies[static_cast<std::size_t>(r.label)];
      out.balance_report = {{"labels", plan.labels}, {"deficits", plan.deficits}, {"copies", copies}};
    }
    out.corpus = balance::merge_balanced(data.corpus, extra, num::derive_seed(seed, kMergeStream));
  }
  balance::assert_hygiene(out.corpus);
  return out;
}

std::vector<clf::MetricRecord> evaluate_arm(const ExperimentConfig& config, const PreparedData& data, const ArmData& arm,
                                            std::uint64_t seed) {
  std::vector<clf::MetricRecord> out;
  const auto test = arm.corpus.in_split(corpus::Split::test);
  for (std::size_t i = 0; i < config.classifiers.size(); ++i) {
    const auto& id = config.classifiers[i];
    const auto model = clf::Classifier::fit(id, arm.corpus, data.vocab.size(), config.classifier_hyper,
                                            num::derive_seed(seed, kClassifierStream, i));
    clf::MetricRecord rec{id, config.dataset.id, arm.arm, seed, model.evaluate(test)};
    spdlog::info("stage=classify seed={} arm={} model={} accuracy={:.4f} macro_f1={:.4f}", seed, clf::to_string(arm.arm),
                 id, rec.metrics.accuracy, rec.metrics.macro_f1);
    out.push_back(std::move(rec));
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  stage("config", [&] {
    config.validate();
    return 0;
  });
  const auto& out_dir = config.output_dir;
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  std::vector<clf::MetricRecord> runs;
  for (const auto seed : config.seeds) {
    const auto data = stage("prepare", [&] { return prepare_data(config, seed); });
    const auto stats = stage("stats", [&] { return corpus::class_stats(data.corpus, corpus::Split::train); });
    for (std::size_t i = 0; i < stats.labels.size(); ++i) {
      spdlog::info("stage=stats seed={} split=train label={} count={}", seed, stats.labels[i], stats.counts[i]);
    }
    spdlog::info("stage=stats seed={} vocab={} records={} imbalance_ratio={:.4f}", seed, data.vocab.size(),
                 data.corpus.records.size(), stats.imbalance_ratio);

    std::optional<GanResult> gan;
    if (config.has_arm(clf::Arm::balanced)) {
      gan = stage("gan", [&] {
        std::optional<std::filesystem::path> save_to;
        if (!out_dir.empty()) save_to = out_dir / fmt::format("gan_seed{}.catg", seed);
        return train_gan(config, data, seed, save_to);
      });
    }
    std::vector<ArmData> arms;
    for (auto a : config.arms) {
      arms.push_back(stage("balance", [&] { return build_arm(a, config, data, gan ? &gan->bundle : nullptr, seed); }));
      if (!out_dir.empty() && !arms.back().balance_report.is_null()) {
        write_json(out_dir / fmt::format("balance_seed{}_{}.json", seed, clf::to_string(a)), arms.back().balance_report);
      }
    }
    stage("hygiene", [&] {
      for (const auto& a : arms) {
        if (!same_slice(a.corpus, arms.front().corpus, corpus::Split::test) ||
            !same_slice(a.corpus, arms.front().corpus, corpus::Split::val)) {
          throw std::logic_error("arm " + clf::to_string(a.arm) + " evaluates on a different slice");
        }
      }
      return 0;
    });
    for (const auto& a : arms) {
      auto recs = stage("classify", [&] { return evaluate_arm(config, data, a, seed); });
      runs.insert(runs.end(), recs.begin(), recs.end());
    }
  }
  return stage("report", [&] {
    return summarize(config.dataset.id, config.seeds, config.arms, config.classifiers, std::move(runs));
  });
}

}  // namespace sentiaug::exp
