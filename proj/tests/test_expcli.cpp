#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles/cls_oracles.hpp"
#include "sentiaug/expcli/config.hpp"
#include "sentiaug/expcli/pipeline.hpp"
#include "sentiaug/expcli/report.hpp"

namespace xp = sentiaug::exp;
namespace clf = sentiaug::clf;
namespace corpus = sentiaug::corpus;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Ten test rows, five per category; `correct` of them right, with all misses on category 1.
std::pair<std::vector<int>, std::vector<int>> outcome(int correct) {
  std::vector<int> truth, pred;
  for (int i = 0; i < 10; ++i) {
    truth.push_back(i < 5 ? 0 : 1);
    pred.push_back(i < 5 ? 0 : (i - 5 < correct - 5 ? 1 : 0));
  }
  return {truth, pred};
}

clf::MetricRecord run(const std::string& model, clf::Arm arm, std::uint64_t seed, int correct) {
  const auto [truth, pred] = outcome(correct);
  return {model, "toy", arm, seed, clf::compute_metrics(truth, pred, 2)};
}

double oracle_f1(int correct) {
  const auto [truth, pred] = outcome(correct);
  return oracle::prf(truth, pred, 2).macro_f1;
}

// Correct counts per (model, arm) for seeds {1, 2}.
const std::map<std::pair<std::string, clf::Arm>, std::pair<int, int>> kGrid = {
    {{"nb", clf::Arm::imbalanced}, {8, 6}},  {{"nb", clf::Arm::balanced}, {9, 7}},
    {{"cnn", clf::Arm::imbalanced}, {5, 7}}, {{"cnn", clf::Arm::balanced}, {8, 8}},
    {{"gru", clf::Arm::imbalanced}, {6, 6}}, {{"gru", clf::Arm::balanced}, {9, 9}},
};

xp::ExperimentReport toy_report(std::string id = "toy") {
  std::vector<clf::MetricRecord> runs;
  for (std::uint64_t seed : {1, 2})
    for (auto arm : {clf::Arm::imbalanced, clf::Arm::balanced})
      for (const std::string m : {"nb", "cnn", "gru"}) {
        const auto& c = kGrid.at({m, arm});
        runs.push_back(run(m, arm, seed, seed == 1 ? c.first : c.second));
        runs.back().dataset_id = id;
      }
  return xp::summarize(id, {1, 2}, {clf::Arm::imbalanced, clf::Arm::balanced}, {"nb", "cnn", "gru"}, runs);
}

const xp::DiffRow& row(const xp::ExperimentReport& r, xp::Family f) {
  for (const auto& d : r.differences)
    if (d.family == f && d.arm == clf::Arm::balanced) return d;
  throw std::runtime_error("missing row");
}

xp::ExperimentConfig small_config() {
  xp::ExperimentConfig c;
  c.dataset.id = "synth";
  c.dataset.source = xp::DataSource::synthetic;
  auto& s = c.dataset.synthetic;
  for (int i = 0; i < 20; ++i) s.shared.push_back("w" + std::to_string(i));
  const std::vector<std::string> templates = {"{any} {cat} {cat}", "{cat} {any} {any} {cat}", "{any} {cat} {any}"};
  corpus::SynthCategory neg{"negative", 40, {}, templates}, pos{"positive", 200, {}, templates};
  for (int i = 0; i < 10; ++i) {
    neg.lexicon.push_back("neg" + std::to_string(i));
    pos.lexicon.push_back("pos" + std::to_string(i));
  }
  s.categories = {neg, pos};
  s.noise = 0.3;
  c.dataset.splits = {0.7, 0.15, 0.15};
  c.prep.remove_stopwords = false;
  c.prep.lemmatize = false;
  c.prep.language_filter = std::nullopt;
  c.gan.generator.d_emb = 8;
  c.gan.generator.d_cat = 4;
  c.gan.generator.d_h = 16;
  c.gan.generator.max_len = 6;
  c.gan.discriminator.d_emb = 8;
  c.gan.discriminator.widths = {2};
  c.gan.discriminator.filters = 8;
  c.gan.train.pretrain_epochs = 2;
  c.gan.train.adversarial_rounds = 2;
  c.gan.train.batch_size = 16;
  c.gan.train.eval_every = 0;
  c.classifiers = {"nb", "tree", "cnn"};
  c.classifier_hyper.nn.d_emb = 8;
  c.classifier_hyper.nn.filters = 8;
  c.classifier_hyper.nn.widths = {2};
  c.classifier_hyper.nn.max_len = 6;
  c.classifier_hyper.nn.max_epochs = 2;
  c.arms = {clf::Arm::imbalanced, clf::Arm::balanced, clf::Arm::duplicated};
  c.seeds = {4, 9};
  return c;
}

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("sentiaug_expcli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Config, JsonRoundTripIsStable) {
  const auto c = small_config();
  const json once = c;
  const json twice = once.get<xp::ExperimentConfig>();
  EXPECT_EQ(once.dump(), twice.dump());
}

TEST(Config, LoadResolvesPathsRelativeToTheFile) {
  const auto dir = temp_dir("cfg");
  json j = {{"dataset", {{"id", "cr"}, {"path", "data/reviews.csv"}, {"schema", "rated5"}}}};
  std::ofstream(dir / "exp.json") << j.dump();
  const auto c = xp::load_config(dir / "exp.json");
  EXPECT_EQ(c.dataset.path, dir / "data/reviews.csv");
  EXPECT_EQ(c.dataset.schema, corpus::Schema::rated5);
  EXPECT_TRUE(c.has_arm(clf::Arm::imbalanced));
  EXPECT_TRUE(c.has_arm(clf::Arm::balanced));
  EXPECT_EQ(c.classifiers.size(), 9u);
}

TEST(Config, ValidationRejectsBrokenConfigs) {
  auto no_balanced = small_config();
  no_balanced.arms = {clf::Arm::imbalanced, clf::Arm::duplicated};
  EXPECT_THROW(no_balanced.validate(), std::invalid_argument);
  auto no_seeds = small_config();
  no_seeds.seeds.clear();
  EXPECT_THROW(no_seeds.validate(), std::invalid_argument);
  auto repeated = small_config();
  repeated.seeds = {3, 3};
  EXPECT_THROW(repeated.validate(), std::invalid_argument);
  auto unknown = small_config();
  unknown.classifiers.push_back("knn");
  EXPECT_THROW(unknown.validate(), std::invalid_argument);
  EXPECT_NO_THROW(small_config().validate());
}

TEST(Report, DifferenceBlockMatchesHandArithmetic) {
  const auto r = toy_report();
  // Accuracy means (imbalanced -> balanced): nb 0.7 -> 0.8, cnn 0.6 -> 0.8, gru 0.6 -> 0.9.
  EXPECT_NEAR(row(r, xp::Family::machine_learning).accuracy, 10.0, 1e-9);
  EXPECT_NEAR(row(r, xp::Family::deep_learning).accuracy, 25.0, 1e-9);
  EXPECT_NEAR(row(r, xp::Family::overall).accuracy, (2 * 25.0 + 1 * 10.0) / 3, 1e-9);
  EXPECT_EQ(row(r, xp::Family::deep_learning).models, 2u);
  EXPECT_EQ(row(r, xp::Family::machine_learning).models, 1u);

  std::map<std::string, double> f1_gain;
  for (const std::string m : {"nb", "cnn", "gru"}) {
    const auto& imb = kGrid.at({m, clf::Arm::imbalanced});
    const auto& bal = kGrid.at({m, clf::Arm::balanced});
    f1_gain[m] = 100 * ((oracle_f1(bal.first) + oracle_f1(bal.second)) / 2 -
                        (oracle_f1(imb.first) + oracle_f1(imb.second)) / 2);
  }
  EXPECT_NEAR(row(r, xp::Family::machine_learning).macro_f1, f1_gain["nb"], 1e-9);
  EXPECT_NEAR(row(r, xp::Family::deep_learning).macro_f1, (f1_gain["cnn"] + f1_gain["gru"]) / 2, 1e-9);
  EXPECT_NEAR(row(r, xp::Family::overall).macro_f1, (f1_gain["nb"] + f1_gain["cnn"] + f1_gain["gru"]) / 3, 1e-9);
}

TEST(Report, ConsistencyCheckCatchesTampering) {
  const auto r = toy_report();
  EXPECT_NO_THROW(xp::check_consistency(r));
  auto mean = r;
  mean.means[0].accuracy += 1e-9;
  EXPECT_THROW(xp::check_consistency(mean), std::logic_error);
  auto diff = r;
  diff.differences.back().macro_f1 += 0.01;
  EXPECT_THROW(xp::check_consistency(diff), std::logic_error);
  EXPECT_THROW(xp::render_report(diff, xp::ReportFormat::markdown), std::logic_error);
  auto runs = r;
  runs.runs[3].metrics = clf::compute_metrics(std::vector<int>{0, 1}, std::vector<int>{0, 0}, 2);
  EXPECT_THROW(xp::check_consistency(runs), std::logic_error);
}

TEST(Report, IncompleteOrEmptyReportsAreRejected) {
  EXPECT_THROW(xp::render_report(std::vector<xp::ExperimentReport>{}, xp::ReportFormat::json), std::invalid_argument);
  auto r = toy_report();
  r.runs.pop_back();
  EXPECT_THROW(xp::summarize("toy", {1, 2}, {clf::Arm::imbalanced, clf::Arm::balanced}, {"nb", "cnn", "gru"}, r.runs),
               std::invalid_argument);
  EXPECT_THROW(xp::summarize("toy", {1}, {clf::Arm::balanced}, {"nb"}, {run("nb", clf::Arm::balanced, 1, 7)}),
               std::invalid_argument);
}

TEST(Report, MarkdownMirrorsTheSummaryLayout) {
  const auto md = xp::render_report(std::vector<xp::ExperimentReport>{toy_report("A"), toy_report("B")},
                                    xp::ReportFormat::markdown);
  EXPECT_NE(md.find("| Metric | Model family | A | B |"), std::string::npos);
  for (const std::string metric : {"Accuracy", "F1"})
    for (const std::string fam : {"Deep learning", "Machine learning", "Overall average"})
      EXPECT_NE(md.find("| " + metric + " | " + fam + " |"), std::string::npos) << metric << " " << fam;
  EXPECT_NE(md.find("| Accuracy | Deep learning | 25.00 | 25.00 |"), std::string::npos);
}

TEST(Report, JsonRoundTripRerendersIdentically) {
  const std::vector<xp::ExperimentReport> reports = {toy_report("A"), toy_report("B")};
  const auto js = xp::render_report(reports, xp::ReportFormat::json);
  const auto md = xp::render_report(reports, xp::ReportFormat::markdown);
  const auto parsed = xp::parse_reports_json(js);
  EXPECT_EQ(xp::render_report(parsed, xp::ReportFormat::markdown), md);
  EXPECT_EQ(xp::render_report(parsed, xp::ReportFormat::json), js);
}

TEST(Report, CsvIsLossless) {
  const std::vector<xp::ExperimentReport> reports = {toy_report("A"), toy_report("B")};
  const auto js = xp::render_report(reports, xp::ReportFormat::json);
  const auto csv = xp::render_report(reports, xp::ReportFormat::csv);
  EXPECT_EQ(csv.rfind("section,dataset,model,arm,seed,metric,value\n", 0), 0u);
  const auto back = xp::parse_reports_csv(csv);
  EXPECT_EQ(xp::render_report(back, xp::ReportFormat::json), js);
  EXPECT_EQ(xp::render_report(back, xp::ReportFormat::csv), csv);
}

TEST(Pipeline, DuplicatedArmNeedsNoGan) {
  const auto cfg = small_config();
  const auto data = xp::prepare_data(cfg, 4);
  const auto dup = xp::build_arm(clf::Arm::duplicated, cfg, data, nullptr, 4);
  EXPECT_THROW(xp::build_arm(clf::Arm::balanced, cfg, data, nullptr, 4), std::invalid_argument);
  std::map<int, std::size_t> counts;
  for (const auto* r : dup.corpus.in_split(corpus::Split::train)) ++counts[r->label];
  EXPECT_EQ(counts[0], counts[1]);
  std::size_t real = 0;
  for (const auto& r : dup.corpus.records) {
    if (r.provenance == corpus::Provenance::real) ++real;
    else EXPECT_EQ(r.split, corpus::Split::train);
  }
  EXPECT_EQ(real, data.corpus.records.size());
  EXPECT_GT(dup.corpus.records.size(), data.corpus.records.size());
}

TEST(Pipeline, ArmsShareTheRealHeldOutSlices) {
  const auto cfg = small_config();
  const auto data = xp::prepare_data(cfg, 9);
  const auto gan = xp::train_gan(cfg, data, 9);
  const auto held_out = [](const corpus::LabeledCorpus& c) {
    std::vector<std::pair<int, std::vector<int>>> out;
    for (auto s : {corpus::Split::val, corpus::Split::test})
      for (const auto* r : c.in_split(s)) {
        EXPECT_EQ(r->provenance, corpus::Provenance::real);
        out.push_back({r->label, r->tokens});
      }
    return out;
  };
  const auto base = held_out(data.corpus);
  for (auto arm : {clf::Arm::imbalanced, clf::Arm::balanced, clf::Arm::duplicated}) {
    const auto a = xp::build_arm(arm, cfg, data, &gan.bundle, 9);
    EXPECT_EQ(held_out(a.corpus), base) << clf::to_string(arm);
  }
  const auto bal = xp::build_arm(clf::Arm::balanced, cfg, data, &gan.bundle, 9);
  std::size_t synthetic = 0;
  for (const auto& r : bal.corpus.records) synthetic += r.provenance == corpus::Provenance::synthetic;
  EXPECT_GT(synthetic, 0u);
}

TEST(Pipeline, FullRunIsDeterministic) {
  auto cfg = small_config();
  cfg.output_dir = temp_dir("run_a");
  const auto a = xp::render_report(xp::run_experiment(cfg), xp::ReportFormat::json);
  cfg.output_dir = temp_dir("run_b");
  const auto b = xp::render_report(xp::run_experiment(cfg), xp::ReportFormat::json);
  EXPECT_EQ(a, b);
  const auto r = xp::parse_reports_json(a).front();
  EXPECT_EQ(r.runs.size(), 2u * 3u * 3u);
  EXPECT_TRUE(fs::exists(cfg.output_dir / "gan_seed4.catg"));
  EXPECT_TRUE(fs::exists(cfg.output_dir / "balance_seed9_duplicated.json"));
}

TEST(Pipeline, StageFailureCarriesTheStageName) {
  auto cfg = small_config();
  cfg.dataset.source = xp::DataSource::csv;
  cfg.dataset.path = "/nonexistent/reviews.csv";
  try {
    xp::run_experiment(cfg);
    FAIL() << "expected a stage failure";
  } catch (const xp::StageError& e) {
    EXPECT_EQ(e.stage(), "prepare");
    EXPECT_EQ(e.record().at("stage"), "prepare");
    EXPECT_FALSE(e.record().at("error").get<std::string>().empty());
  }
}

TEST(Pipeline, PreparedDirectoryRoundTrips) {
  const auto cfg = small_config();
  const auto data = xp::prepare_data(cfg, 4);
  const auto dir = temp_dir("prep");
  xp::write_prepared(dir, data);
  const auto back = xp::read_prepared(dir);
  EXPECT_EQ(back.vocab.size(), data.vocab.size());
  EXPECT_EQ(back.corpus.label_names, data.corpus.label_names);
  ASSERT_EQ(back.corpus.records.size(), data.corpus.records.size());
  for (std::size_t i = 0; i < data.corpus.records.size(); ++i) {
    EXPECT_EQ(back.corpus.records[i].tokens, data.corpus.records[i].tokens);
    EXPECT_EQ(back.corpus.records[i].split, data.corpus.records[i].split);
  }
}

namespace {

struct Proc {
  int code;
  std::string out;
};

Proc cli(const std::string& args) {
  const std::string cmd = std::string(SENTIAUG_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[512];
  while (std::fgets(buf, sizeof buf, p)) out += buf;
  const int status = pclose(p);
  return {WEXITSTATUS(status), out};
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("--help").code, 0);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("sample --n 3").code, 1);
  EXPECT_EQ(cli("--config /nonexistent.json run").code, 2);
}

TEST(Cli, StatsOnTheLabeled3Fixture) {
  const auto r = cli(std::string("stats --schema labeled3 --input ") + SENTIAUG_FIXTURES + "/cr23k_small.csv");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("label=positive count=8\n"), std::string::npos);
  EXPECT_NE(r.out.find("label=neutral count=2\n"), std::string::npos);
  EXPECT_NE(r.out.find("label=negative count=2\n"), std::string::npos);
  EXPECT_NE(r.out.find("imbalance_ratio=4.0000"), std::string::npos);
}

TEST(Cli, SampleEmitsJsonLines) {
  const auto dir = temp_dir("cli");
  std::ofstream(dir / "exp.json") << json(small_config()).dump();
  const std::string base = "--config " + (dir / "exp.json").string() + " --seed 4 --out " + dir.string();
  ASSERT_EQ(cli(base + " prep").code, 0);
  ASSERT_EQ(cli(base + " train-gan --data " + dir.string()).code, 0);
  ASSERT_TRUE(fs::exists(dir / "history.csv"));
  const auto r = cli("--config " + (dir / "exp.json").string() + " sample --category negative --n 10 --checkpoint " +
                     (dir / "gan.catg").string() + " --data " + dir.string());
  EXPECT_EQ(r.code, 0);
  std::size_t lines = 0;
  std::size_t pos = 0, next;
  while ((next = r.out.find('\n', pos)) != std::string::npos) {
    const auto rec = json::parse(r.out.substr(pos, next - pos));
    EXPECT_EQ(rec.at("label"), "negative");
    EXPECT_EQ(rec.at("provenance"), "synthetic");
    ++lines;
    pos = next + 1;
  }
  EXPECT_EQ(lines, 10u);
}
