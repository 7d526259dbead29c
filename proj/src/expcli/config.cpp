#include "sentiaug/expcli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sentiaug::exp {

namespace {

using nlohmann::json;

std::vector<std::string> word_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<std::string>>();
  const auto stem = j.at("stem").get<std::string>();
  const auto size = j.at("size").get<std::size_t>();
  std::vector<std::string> out;
  for (std::size_t i = 0; i < size; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

json synth_json(const corpus::SynthSpec& s) {
  json cats = json::array();
  for (const auto& c : s.categories) {
    cats.push_back({{"label", c.label}, {"count", c.count}, {"lexicon", c.lexicon}, {"templates", c.templates}});
  }
  return {{"categories", cats}, {"shared", s.shared}, {"noise", s.noise}, {"zipf", s.zipf}};
}

corpus::SynthSpec synth_from(const json& j) {
  corpus::SynthSpec s;
  s.shared = word_list(j.at("shared"));
  s.noise = j.value("noise", 0.0);
  s.zipf = j.value("zipf", 0.0);
  const auto default_templates = j.value("templates", std::vector<std::string>{});
  for (const auto& c : j.at("categories")) {
    corpus::SynthCategory cat;
    cat.label = c.at("label").get<std::string>();
    cat.count = c.at("count").get<std::size_t>();
    cat.lexicon = word_list(c.at("lexicon"));
    cat.templates = c.value("templates", default_templates);
    s.categories.push_back(std::move(cat));
  }
  return s;
}

json prep_json(const text::PrepConfig& p) {
  return {{"lowercase", p.lowercase},
          {"remove_stopwords", p.remove_stopwords},
          {"lemmatize", p.lemmatize},
          {"keep_punctuation", p.keep_punctuation},
          {"language_filter", p.language_filter ? json(*p.language_filter) : json(nullptr)},
          {"min_tokens", p.min_tokens},
          {"max_tokens", p.max_tokens}};
}

text::PrepConfig prep_from(const json& j) {
  text::PrepConfig p;
  p.lowercase = j.value("lowercase", p.lowercase);
  p.remove_stopwords = j.value("remove_stopwords", p.remove_stopwords);
  p.lemmatize = j.value("lemmatize", p.lemmatize);
  p.keep_punctuation = j.value("keep_punctuation", p.keep_punctuation);
  if (j.contains("language_filter")) {
    const auto& lf = j.at("language_filter");
    p.language_filter = lf.is_null() ? std::nullopt : std::optional<std::string>(lf.get<std::string>());
  }
  p.min_tokens = j.value("min_tokens", p.min_tokens);
  p.max_tokens = j.value("max_tokens", p.max_tokens);
  p.validate();
  return p;
}

json gan_json(const GanSetup& g) {
  return {{"kind", to_string(g.kind)},
          {"generator",
           {{"d_emb", g.generator.d_emb},
            {"d_cat", g.generator.d_cat},
            {"d_h", g.generator.d_h},
            {"max_len", g.generator.max_len},
            {"init_scale", g.generator.init_scale}}},
          {"discriminator",
           {{"d_emb", g.discriminator.d_emb},
            {"widths", g.discriminator.widths},
            {"filters", g.discriminator.filters},
            {"init_scale", g.discriminator.init_scale}}},
          {"train", g.train},
          {"checkpoint", g.checkpoint ? json(g.checkpoint->string()) : json(nullptr)}};
}

GanSetup gan_from(const json& j) {
  GanSetup g;
  g.kind = parse_gan_kind(j.value("kind", std::string("catgan")));
  if (j.contains("generator")) {
    const auto& s = j.at("generator");
    g.generator.d_emb = s.value("d_emb", g.generator.d_emb);
    g.generator.d_cat = s.value("d_cat", g.generator.d_cat);
    g.generator.d_h = s.value("d_h", g.generator.d_h);
    g.generator.max_len = s.value("max_len", g.generator.max_len);
    g.generator.init_scale = s.value("init_scale", g.generator.init_scale);
  }
  if (j.contains("discriminator")) {
    const auto& s = j.at("discriminator");
    g.discriminator.d_emb = s.value("d_emb", g.discriminator.d_emb);
    g.discriminator.widths = s.value("widths", g.discriminator.widths);
    g.discriminator.filters = s.value("filters", g.discriminator.filters);
    g.discriminator.init_scale = s.value("init_scale", g.discriminator.init_scale);
  }
  if (j.contains("train")) g.train = j.at("train").get<train::TrainConfig>();
  if (j.contains("checkpoint") && !j.at("checkpoint").is_null()) g.checkpoint = j.at("checkpoint").get<std::string>();
  return g;
}

}  // namespace

std::string to_string(GanKind k) { return k == GanKind::catgan ? "catgan" : "sentigan"; }

GanKind parse_gan_kind(const std::string& s) {
  if (s == "catgan") return GanKind::catgan;
  if (s == "sentigan") return GanKind::sentigan;
  throw std::invalid_argument("unknown GAN kind: " + s);
}

bool ExperimentConfig::has_arm(clf::Arm a) const { return std::find(arms.begin(), arms.end(), a) != arms.end(); }

void ExperimentConfig::validate() const {
  if (!has_arm(clf::Arm::imbalanced) || !has_arm(clf::Arm::balanced)) {
    throw std::invalid_argument("config: arms must include imbalanced and balanced");
  }
  if (std::set<clf::Arm>(arms.begin(), arms.end()).size() != arms.size()) throw std::invalid_argument("config: repeated arm");
  if (seeds.empty()) throw std::invalid_argument("config: need at least one seed");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) throw std::invalid_argument("config: repeated seed");
  if (classifiers.empty()) throw std::invalid_argument("config: need at least one classifier");
  if (std::set<std::string>(classifiers.begin(), classifiers.end()).size() != classifiers.size()) {
    throw std::invalid_argument("config: repeated classifier");
  }
  for (const auto& id : classifiers) clf::is_neural(id);
  if (dataset.id.empty()) throw std::invalid_argument("config: dataset id is empty");
  if (dataset.source == DataSource::csv && dataset.path.empty()) throw std::invalid_argument("config: csv dataset needs a path");
  if (dataset.source == DataSource::synthetic && dataset.synthetic.categories.size() < 2) {
    throw std::invalid_argument("config: synthetic dataset needs at least two categories");
  }
  if (dataset.vocab_max <= corpus::kReserved) throw std::invalid_argument("config: vocab_max too small");
  prep.validate();
  gan.train.validate();
  classifier_hyper.ml.validate();
  classifier_hyper.nn.validate();
  if (balance.attempts_per_record == 0) throw std::invalid_argument("config: attempts_per_record must be positive");
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  json arms = json::array();
  for (auto a : c.arms) arms.push_back(clf::to_string(a));
  json dataset = {{"id", c.dataset.id},
                  {"source", c.dataset.source == DataSource::csv ? "csv" : "synthetic"},
                  {"splits", {{"train", c.dataset.splits.train}, {"val", c.dataset.splits.val}, {"test", c.dataset.splits.test}}},
                  {"stratified", c.dataset.stratified},
                  {"vocab_max", c.dataset.vocab_max},
                  {"vocab_min_freq", c.dataset.vocab_min_freq}};
  if (c.dataset.source == DataSource::csv) {
    dataset["path"] = c.dataset.path.string();
    dataset["schema"] = corpus::schema_name(c.dataset.schema);
  } else {
    dataset["synthetic"] = synth_json(c.dataset.synthetic);
  }
  j = json{{"dataset", dataset},
           {"prep", prep_json(c.prep)},
           {"gan", gan_json(c.gan)},
           {"balance",
            {{"min_len", c.balance.filters.min_len},
             {"max_len", c.balance.filters.max_len},
             {"max_unk_fraction", c.balance.filters.max_unk_fraction},
             {"dedup", c.balance.filters.dedup},
             {"oversample_cap", c.balance.oversample_cap},
             {"attempts_per_record", c.balance.attempts_per_record}}},
           {"classifiers", c.classifiers},
           {"classifier_hyper", c.classifier_hyper},
           {"arms", arms},
           {"seeds", c.seeds},
           {"output_dir", c.output_dir.string()}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c = ExperimentConfig{};
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    c.dataset.id = d.value("id", c.dataset.id);
    const auto source = d.value("source", std::string("csv"));
    if (source == "csv") {
      c.dataset.source = DataSource::csv;
      c.dataset.path = d.value("path", std::string());
      c.dataset.schema = corpus::parse_schema(d.value("schema", std::string("labeled3")));
    } else if (source == "synthetic") {
      c.dataset.source = DataSource::synthetic;
      c.dataset.synthetic = synth_from(d.at("synthetic"));
    } else {
      throw std::invalid_argument("config: unknown dataset source " + source);
    }
    if (d.contains("splits")) {
      const auto& s = d.at("splits");
      c.dataset.splits = {s.value("train", 0.8), s.value("val", 0.1), s.value("test", 0.1)};
    }
    c.dataset.stratified = d.value("stratified", c.dataset.stratified);
    c.dataset.vocab_max = d.value("vocab_max", c.dataset.vocab_max);
    c.dataset.vocab_min_freq = d.value("vocab_min_freq", c.dataset.vocab_min_freq);
  }
  if (j.contains("prep")) c.prep = prep_from(j.at("prep"));
  if (j.contains("gan")) c.gan = gan_from(j.at("gan"));
  if (j.contains("balance")) {
    const auto& b = j.at("balance");
    c.balance.filters.min_len = b.value("min_len", c.balance.filters.min_len);
    c.balance.filters.max_len = b.value("max_len", c.balance.filters.max_len);
    c.balance.filters.max_unk_fraction = b.value("max_unk_fraction", c.balance.filters.max_unk_fraction);
    c.balance.filters.dedup = b.value("dedup", c.balance.filters.dedup);
    c.balance.oversample_cap = b.value("oversample_cap", c.balance.oversample_cap);
    c.balance.attempts_per_record = b.value("attempts_per_record", c.balance.attempts_per_record);
  }
  if (j.contains("classifiers")) c.classifiers = j.at("classifiers").get<std::vector<std::string>>();
  if (j.contains("classifier_hyper")) c.classifier_hyper = j.at("classifier_hyper").get<clf::ClassifierHyper>();
  if (j.contains("arms")) {
    c.arms.clear();
    for (const auto& a : j.at("arms")) c.arms.push_back(clf::parse_arm(a.get<std::string>()));
  }
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.output_dir = j.value("output_dir", std::string());
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  ExperimentConfig c = json::parse(in).get<ExperimentConfig>();
  const auto base = path.parent_path();
  if (c.dataset.source == DataSource::csv && c.dataset.path.is_relative()) c.dataset.path = base / c.dataset.path;
  if (c.gan.checkpoint && c.gan.checkpoint->is_relative()) c.gan.checkpoint = base / *c.gan.checkpoint;
  c.validate();
  return c;
}

}  // namespace sentiaug::exp
