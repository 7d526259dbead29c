#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "sentiaug/advtrain/adversarial.hpp"
#include "sentiaug/advtrain/history.hpp"
#include "sentiaug/corpus/dataset.hpp"
#include "sentiaug/expcli/config.hpp"
#include "sentiaug/expcli/pipeline.hpp"
#include "sentiaug/expcli/report.hpp"
#include "sentiaug/numerics/random.hpp"

namespace fs = std::filesystem;
namespace xp = sentiaug::exp;
namespace corpus = sentiaug::corpus;
namespace clf = sentiaug::clf;
namespace train = sentiaug::train;
using nlohmann::json;

namespace {

constexpr int kUsageError = 1;
constexpr int kStageFailure = 2;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string log_level = "info";
};

struct Options {
  std::string input, schema, data, checkpoint, category, arm = "balanced", model, model_file, split = "test";
  std::string format = "markdown";
  std::vector<std::string> inputs;
  std::size_t n = 10;
};

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const xp::StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw xp::StageError(name, e.what());
  }
}

xp::ExperimentConfig config_of(const Globals& g) {
  auto cfg = stage("config", [&] { return g.config.empty() ? xp::ExperimentConfig{} : xp::load_config(g.config); });
  if (g.seed) cfg.seeds = {*g.seed};
  if (!g.out.empty()) cfg.output_dir = g.out;
  return cfg;
}

std::uint64_t seed_of(const Globals& g, const xp::ExperimentConfig& cfg) { return g.seed.value_or(cfg.seeds.front()); }

fs::path require_out(const Globals& g) {
  if (g.out.empty()) throw CLI::ValidationError("--out", "this subcommand needs --out <dir>");
  fs::create_directories(g.out);
  return g.out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

xp::PreparedData data_of(const Options& o, const xp::ExperimentConfig& cfg, std::uint64_t seed) {
  return stage("prepare", [&] { return o.data.empty() ? xp::prepare_data(cfg, seed) : xp::read_prepared(o.data); });
}

void print_stats(const std::vector<std::string>& labels, const std::vector<std::size_t>& counts) {
  const auto s = corpus::class_stats(labels, counts);
  for (std::size_t i = 0; i < s.labels.size(); ++i) std::cout << "label=" << s.labels[i] << " count=" << s.counts[i] << "\n";
  std::cout << "total=" << s.total << " majority=" << s.labels[s.majority] << " minority=" << s.labels[s.minority]
            << " imbalance_ratio=" << fmt::format("{:.4f}", s.imbalance_ratio) << "\n";
}

int cmd_prep(const Globals& g, const Options& o) {
  auto cfg = config_of(g);
  if (!o.input.empty()) {
    cfg.dataset.source = xp::DataSource::csv;
    cfg.dataset.path = o.input;
  }
  if (!o.schema.empty()) cfg.dataset.schema = corpus::parse_schema(o.schema);
  const auto out = require_out(g);
  const auto seed = seed_of(g, cfg);
  const auto data = data_of({}, cfg, seed);
  stage("write", [&] {
    xp::write_prepared(out, data);
    return 0;
  });
  spdlog::info("stage=prep seed={} raw={} kept={} row_errors={} dropped={} vocab={}", seed, data.raw_records,
               data.corpus.records.size(), data.row_errors, data.drops.total(), data.vocab.size());
  return 0;
}

int cmd_stats(const Globals& g, const Options& o) {
  return stage("stats", [&] {
    std::map<std::string, std::size_t> counts;
    std::vector<std::string> order;
    const auto add = [&](const std::string& label) {
      if (!counts.count(label)) order.push_back(label);
      ++counts[label];
    };
    if (!o.input.empty() && fs::is_directory(o.input)) {
      const auto d = xp::read_prepared(o.input);
      for (const auto* r : d.corpus.in_split(corpus::Split::train)) add(d.corpus.label_names[static_cast<std::size_t>(r->label)]);
    } else if (!o.input.empty() && fs::path(o.input).extension() == ".jsonl") {
      for (const auto& r : corpus::read_jsonl(o.input)) add(r.label);
    } else if (!o.input.empty()) {
      const auto schema = corpus::parse_schema(o.schema.empty() ? "labeled3" : o.schema);
      const auto loaded = corpus::load_dataset(o.input, schema);
      for (const auto& r : loaded.records) add(r.label);
      for (const auto& c : corpus::LabelingRule::defaults(schema).categories())
        if (!counts.count(c)) order.push_back(c), counts[c] = 0;
      if (!loaded.errors.empty()) std::cout << "row_errors=" << loaded.errors.size() << "\n";
    } else {
      const auto cfg = config_of(g);
      const auto d = xp::prepare_data(cfg, seed_of(g, cfg));
      for (const auto* r : d.corpus.in_split(corpus::Split::train)) add(d.corpus.label_names[static_cast<std::size_t>(r->label)]);
    }
    std::vector<std::string> labels;
    std::vector<std::size_t> values;
    for (const auto& l : order) {
      labels.push_back(l);
      values.push_back(counts[l]);
    }
    print_stats(labels, values);
    return 0;
  });
}

int cmd_train_gan(const Globals& g, const Options& o) {
  const auto cfg = config_of(g);
  const auto out = require_out(g);
  const auto seed = seed_of(g, cfg);
  const auto data = data_of(o, cfg, seed);
  const auto result = stage("gan", [&] { return xp::train_gan(cfg, data, seed, out / "gan.catg"); });
  stage("write", [&] {
    train::write_history_csv(out / "history.csv", result.history);
    return 0;
  });
  spdlog::info("stage=gan seed={} rounds={} checkpoint={}", seed, result.history.size(), (out / "gan.catg").string());
  return 0;
}

int cmd_sample(const Globals& g, const Options& o) {
  if (o.checkpoint.empty() || o.data.empty()) throw CLI::ValidationError("sample", "needs --checkpoint and --data");
  const auto cfg = config_of(g);
  const auto seed = seed_of(g, cfg);
  const auto data = data_of(o, cfg, seed);
  const auto gan = stage("load", [&] { return xp::load_gan(o.checkpoint); });
  const auto& names = data.corpus.label_names;
  const auto it = std::find(names.begin(), names.end(), o.category);
  if (it == names.end()) throw CLI::ValidationError("--category", "unknown category " + o.category);
  const int cat = static_cast<int>(it - names.begin());
  const auto seqs = stage("sample", [&] { return gan.bundle.sample(cat, o.n, sentiaug::num::derive_seed(seed, 0x5a3)); });
  std::vector<corpus::TextRecord> recs;
  for (const auto& s : seqs) recs.push_back({o.category, data.vocab.decode(s), corpus::Provenance::synthetic, corpus::Split::train});
  if (!g.out.empty()) {
    corpus::write_jsonl(require_out(g) / "samples.jsonl", recs);
  } else {
    for (const auto& r : recs) {
      std::cout << json{{"label", r.label}, {"tokens", r.tokens}, {"provenance", "synthetic"}, {"split", "train"}}.dump()
                << "\n";
    }
  }
  return 0;
}

int cmd_metrics(const Globals& g, const Options& o) {
  if (o.checkpoint.empty() || o.data.empty()) throw CLI::ValidationError("metrics", "needs --checkpoint and --data");
  const auto cfg = config_of(g);
  const auto seed = seed_of(g, cfg);
  const auto data = data_of(o, cfg, seed);
  const auto gan = stage("load", [&] { return xp::load_gan(o.checkpoint); });
  const auto snap = stage("metrics", [&] {
    const auto& any = gan.bundle.for_category(0);
    const auto gdata = train::make_gan_data(data.corpus, any.config().max_len);
    return train::snapshot([&](int c) -> const sentiaug::gan::Generator& { return gan.bundle.for_category(c); }, gdata,
                           cfg.gan.train, sentiaug::num::derive_seed(seed, 0x3e7));
  });
  std::cout << json{{"bleu", snap.bleu}, {"bleu_n", cfg.gan.train.bleu_n}, {"nll_gen", snap.nll_gen}, {"nll_div", snap.nll_div}}.dump()
            << "\n";
  return 0;
}

int cmd_balance(const Globals& g, const Options& o) {
  const auto cfg = config_of(g);
  const auto out = require_out(g);
  const auto seed = seed_of(g, cfg);
  const auto data = data_of(o, cfg, seed);
  const auto arm = clf::parse_arm(o.arm);
  std::optional<xp::GanResult> gan;
  if (arm == clf::Arm::balanced) {
    if (o.checkpoint.empty()) throw CLI::ValidationError("--checkpoint", "the balanced arm needs a GAN checkpoint");
    gan = stage("load", [&] { return xp::load_gan(o.checkpoint); });
  }
  const auto built = stage("balance", [&] { return xp::build_arm(arm, cfg, data, gan ? &gan->bundle : nullptr, seed); });
  stage("write", [&] {
    xp::PreparedData merged;
    merged.vocab = data.vocab;
    merged.corpus = built.corpus;
    xp::write_prepared(out, merged);
    if (!built.balance_report.is_null()) write_text(out / "plan.json", built.balance_report.dump(2) + "\n");
    return 0;
  });
  return 0;
}

int cmd_train_clf(const Globals& g, const Options& o) {
  if (o.model.empty()) throw CLI::ValidationError("--model", "required");
  const auto cfg = config_of(g);
  const auto out = require_out(g);
  const auto seed = seed_of(g, cfg);
  const auto data = data_of(o, cfg, seed);
  const auto model = stage("train", [&] { return clf::Classifier::fit(o.model, data.corpus, data.vocab.size(), cfg.classifier_hyper, seed); });
  stage("write", [&] {
    model.save(out / (o.model + ".clf"));
    if (model.neural()) write_text(out / (o.model + "_curve.json"), json(model.curve()).dump(2) + "\n");
    return 0;
  });
  spdlog::info("stage=train-clf seed={} model={} path={}", seed, o.model, (out / (o.model + ".clf")).string());
  return 0;
}

int cmd_evaluate(const Globals& g, const Options& o) {
  if (o.model_file.empty() || o.data.empty()) throw CLI::ValidationError("evaluate", "needs --model-file and --data");
  const auto cfg = config_of(g);
  const auto data = data_of(o, cfg, seed_of(g, cfg));
  const auto model = stage("load", [&] { return clf::Classifier::load(o.model_file); });
  const auto split = corpus::parse_split(o.split);
  const auto m = stage("evaluate", [&] { return model.evaluate(data.corpus.in_split(split)); });
  std::cout << json{{"model_id", model.id()}, {"split", o.split}, {"metrics", m}}.dump() << "\n";
  return 0;
}

int cmd_run(const Globals& g, const Options&) {
  const auto cfg = config_of(g);
  const auto report = xp::run_experiment(cfg);
  const std::string md = stage("report", [&] { return xp::render_report(report, xp::ReportFormat::markdown); });
  if (!cfg.output_dir.empty()) {
    stage("write", [&] {
      write_text(cfg.output_dir / "report.json", xp::render_report(report, xp::ReportFormat::json));
      write_text(cfg.output_dir / "report.csv", xp::render_report(report, xp::ReportFormat::csv));
      write_text(cfg.output_dir / "report.md", md);
      return 0;
    });
  }
  std::cout << md;
  return 0;
}

int cmd_report(const Globals& g, const Options& o) {
  if (o.inputs.empty()) throw CLI::ValidationError("--in", "at least one report file");
  const auto format = xp::parse_format(o.format);
  const auto text = stage("report", [&] {
    std::vector<xp::ExperimentReport> reports;
    for (const auto& p : o.inputs) {
      const auto body = read_text(p);
      auto part = fs::path(p).extension() == ".csv" ? xp::parse_reports_csv(body) : xp::parse_reports_json(body);
      reports.insert(reports.end(), part.begin(), part.end());
    }
    return xp::render_report(reports, format);
  });
  if (!g.out.empty()) {
    const char* ext = format == xp::ReportFormat::markdown ? "md" : format == xp::ReportFormat::csv ? "csv" : "json";
    write_text(require_out(g) / (std::string("report.") + ext), text);
  } else {
    std::cout << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentiment corpus balancing with GAN text generation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  Options o;
  app.add_option("--config", g.config, "experiment config (JSON)");
  app.add_option("--seed", g.seed, "overrides the config seeds");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off");

  std::map<CLI::App*, int (*)(const Globals&, const Options&)> handlers;
  const auto sub = [&](const char* name, const char* help, int (*fn)(const Globals&, const Options&)) {
    auto* s = app.add_subcommand(name, help);
    handlers[s] = fn;
    return s;
  };
  auto* prep = sub("prep", "load, clean, split and encode a dataset", cmd_prep);
  prep->add_option("--input", o.input, "dataset CSV");
  prep->add_option("--schema", o.schema, "labeled3, rated5 or labeled2");
  auto* stats = sub("stats", "per-label counts and imbalance ratio", cmd_stats);
  stats->add_option("--input", o.input, "dataset CSV, corpus JSONL or prepared directory");
  stats->add_option("--schema", o.schema, "schema of a CSV input");
  auto* tg = sub("train-gan", "pretrain and adversarially train the configured GAN", cmd_train_gan);
  tg->add_option("--data", o.data, "prepared directory");
  auto* sample = sub("sample", "emit generated records as JSON lines", cmd_sample);
  sample->add_option("--checkpoint", o.checkpoint, "GAN checkpoint")->required();
  sample->add_option("--data", o.data, "prepared directory (vocabulary and labels)")->required();
  sample->add_option("--category", o.category, "category label")->required();
  sample->add_option("--n", o.n, "number of records")->check(CLI::PositiveNumber);
  auto* metrics = sub("metrics", "BLEU, NLL_gen and NLL_div of a checkpoint", cmd_metrics);
  metrics->add_option("--checkpoint", o.checkpoint, "GAN checkpoint")->required();
  metrics->add_option("--data", o.data, "prepared directory")->required();
  auto* bal = sub("balance", "fill minority deficits and write the merged corpus", cmd_balance);
  bal->add_option("--data", o.data, "prepared directory");
  bal->add_option("--checkpoint", o.checkpoint, "GAN checkpoint (balanced arm)");
  bal->add_option("--arm", o.arm, "balanced or duplicated");
  auto* tc = sub("train-clf", "train one classifier on the train split", cmd_train_clf);
  tc->add_option("--data", o.data, "prepared directory");
  tc->add_option("--model", o.model, "nb, logreg, svm, tree, adaboost, rnn, gru, bilstm, cnn")->required();
  auto* ev = sub("evaluate", "score a saved classifier", cmd_evaluate);
  ev->add_option("--model-file", o.model_file, "saved classifier")->required();
  ev->add_option("--data", o.data, "prepared directory")->required();
  ev->add_option("--split", o.split, "test or val");
  sub("run", "full imbalanced vs balanced comparison", cmd_run);
  auto* rep = sub("report", "render saved reports", cmd_report);
  rep->add_option("--in", o.inputs, "report JSON or CSV files")->required();
  rep->add_option("--format", o.format, "markdown, csv or json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  auto logger = spdlog::stderr_logger_st("sentiaug");
  logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e level=%l %v");
  logger->set_level(spdlog::level::from_str(g.log_level));
  spdlog::set_default_logger(logger);

  CLI::App* chosen = app.get_subcommands().front();
  try {
    return handlers.at(chosen)(g, o);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << chosen->help();
    return kUsageError;
  } catch (const xp::StageError& e) {
    spdlog::error("stage={} error=\"{}\"", e.stage(), e.record().at("error").get<std::string>());
    std::cerr << e.record().dump() << "\n";
    return kStageFailure;
  } catch (const std::exception& e) {
    const xp::StageError wrapped(chosen->get_name(), e.what());
    spdlog::error("stage={} error=\"{}\"", wrapped.stage(), e.what());
    std::cerr << wrapped.record().dump() << "\n";
    return kStageFailure;
  }
}
