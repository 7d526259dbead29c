#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "fixtures/synthetic.hpp"
#include "sentiaug/advtrain/pretrain.hpp"
#include "sentiaug/balance/balance.hpp"

namespace bal = sentiaug::balance;
namespace corpus = sentiaug::corpus;
namespace gan = sentiaug::gan;
namespace train = sentiaug::train;

namespace {

gan::GeneratorConfig shared_config(std::size_t vocab, std::size_t k, std::size_t max_len) {
  gan::GeneratorConfig c;
  c.vocab_size = vocab;
  c.num_categories = k;
  c.d_emb = 24;
  c.d_cat = 4;
  c.d_h = 48;
  c.max_len = max_len;
  return c;
}

// 3-category fixture thinned to an imbalanced train split: 600 / 150 / 60.
struct Imbalanced {
  fixture::Fixture f;
  Imbalanced() : f(fixture::build(fixture::three_category_spec(750), 21)) {
    const std::size_t keep[3] = {600, 150, 60};
    std::size_t seen[3] = {0, 0, 0};
    std::vector<corpus::Record> recs;
    for (const auto& r : f.data.records) {
      const auto c = static_cast<std::size_t>(r.label);
      if (r.split == corpus::Split::train && seen[c]++ >= keep[c]) continue;
      recs.push_back(r);
    }
    f.data.records = recs;
  }
};

const Imbalanced& imbalanced() {
  static const Imbalanced im;
  return im;
}

const gan::Generator& trained_shared() {
  static const gan::Generator g = [] {
    const auto& f = imbalanced().f;
    gan::Generator gen(shared_config(f.vocab.size(), 3, 17), 5);
    train::TrainConfig cfg;
    cfg.pretrain_epochs = 8;
    cfg.seed = 2;
    train::pretrain_mle(gen, train::make_gan_data(f.data, 17), cfg);
    return gen;
  }();
  return g;
}

std::string jsonl_bytes(const corpus::LabeledCorpus& c, const corpus::Vocab& v, const std::string& name) {
  const auto path = std::filesystem::temp_directory_path() / name;
  corpus::write_jsonl(path, corpus::decode_corpus(c, v));
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Plan, MajorityMatchDeficits) {
  auto p = bal::compute_plan(corpus::class_stats({"pos", "neg", "neu"}, {100, 20, 10}));
  EXPECT_EQ(p.deficits, (std::vector<std::size_t>{0, 80, 90}));
  EXPECT_EQ(p.targets, (std::vector<std::size_t>{100, 100, 100}));
  EXPECT_EQ(p.total_quota(), 170u);
  auto even = bal::compute_plan(corpus::class_stats({"a", "b"}, {7, 7}));
  EXPECT_EQ(even.deficits, (std::vector<std::size_t>{0, 0}));
  auto cr23k = bal::compute_plan(corpus::class_stats({"positive", "negative", "neutral"}, {18476, 2316, 1145}));
  EXPECT_EQ(cr23k.deficits, (std::vector<std::size_t>{0, 16160, 17331}));
}

TEST(Plan, OversampleCapLimitsQuotaNotDeficit) {
  auto p = bal::compute_plan(corpus::class_stats({"pos", "neg"}, {100, 20}), bal::TargetPolicy::majority_match, {}, 2.0);
  EXPECT_EQ(p.deficits[1], 80u);
  EXPECT_EQ(p.quota(1), 40u);
  EXPECT_EQ(p.quota(0), 0u);
  EXPECT_THROW(bal::compute_plan(corpus::class_stats({"a"}, {1}), bal::TargetPolicy::majority_match, {}, -1.0),
               std::invalid_argument);
  bal::GenerationFilters bad;
  bad.max_unk_fraction = 1.5;
  EXPECT_THROW(bal::compute_plan(corpus::class_stats({"a"}, {1}), bal::TargetPolicy::majority_match, bad),
               std::invalid_argument);
}

TEST(Generate, FillsDeficitsWithUniqueSyntheticTrainRecords) {
  const auto& f = imbalanced().f;
  const auto plan = bal::compute_plan(corpus::class_stats(f.data, corpus::Split::train));
  ASSERT_EQ(plan.deficits, (std::vector<std::size_t>{0, 450, 540}));
  const auto bundle = bal::GeneratorBundle::shared(trained_shared());
  const auto res = bal::generate_minority(bundle, plan, f.data, 9);
  ASSERT_TRUE(res.complete());
  EXPECT_EQ(res.report[0].attempts, 0u);
  EXPECT_EQ(res.report[1].accepted, 450u);
  EXPECT_EQ(res.report[2].accepted, 540u);
  std::set<std::vector<int>> real, synth;
  for (const auto& r : f.data.records) real.insert(r.tokens);
  std::size_t per[3] = {0, 0, 0};
  for (const auto& r : res.records) {
    EXPECT_EQ(r.provenance, corpus::Provenance::synthetic);
    EXPECT_EQ(r.split, corpus::Split::train);
    EXPECT_TRUE(synth.insert(r.tokens).second);
    EXPECT_EQ(real.count(r.tokens), 0u);
    ++per[r.label];
  }
  EXPECT_EQ(per[0], 0u);
  EXPECT_EQ(per[1], 450u);
  for (const auto& rep : res.report) {
    if (rep.requested == 0) continue;
    EXPECT_GE(rep.acceptance_rate(), 0.5) << rep.label;
    EXPECT_EQ(rep.attempts, rep.accepted + rep.rejected_length + rep.rejected_unk + rep.rejected_reserved +
                                rep.rejected_duplicate);
  }
}

TEST(Generate, ExhaustedBudgetReportsShortfall) {
  const auto& f = imbalanced().f;
  gan::Generator eos_only(shared_config(f.vocab.size(), 3, 17), 1);
  for (auto& p : eos_only.parameters()) {
    if (p.name == "out/w") for (double& v : p.tensor.mutable_data()) v = 0.0;
    if (p.name == "out/b") {
      for (double& v : p.tensor.mutable_data()) v = 0.0;
      p.tensor.mutable_data()[corpus::kEos] = 50.0;
    }
  }
  const auto plan = bal::compute_plan(corpus::class_stats(f.data, corpus::Split::train));
  const auto res = bal::generate_minority(bal::GeneratorBundle::shared(eos_only), plan, f.data, 1, 2);
  EXPECT_FALSE(res.complete());
  EXPECT_TRUE(res.records.empty());
  EXPECT_EQ(res.report[1].attempts, 900u);
  EXPECT_EQ(res.report[1].rejected_length, 900u);
  EXPECT_EQ(res.report[1].shortfall, 450u);

  gan::Generator unk_only = eos_only.clone();
  for (auto& p : unk_only.parameters())
    if (p.name == "out/b") {
      p.tensor.mutable_data()[corpus::kEos] = 0.0;
      p.tensor.mutable_data()[corpus::kUnk] = 50.0;
    }
  const auto unk = bal::generate_minority(bal::GeneratorBundle::shared(unk_only), plan, f.data, 1, 1);
  EXPECT_EQ(unk.report[2].rejected_unk, 540u);
}

TEST(Merge, BalancesTrainAndLeavesHeldOutSplitsAlone) {
  const auto& f = imbalanced().f;
  const auto plan = bal::compute_plan(corpus::class_stats(f.data, corpus::Split::train));
  const auto res = bal::generate_minority(bal::GeneratorBundle::shared(trained_shared()), plan, f.data, 9);
  const auto merged = bal::merge_balanced(f.data, res.records, 4);
  EXPECT_DOUBLE_EQ(corpus::class_stats(merged, corpus::Split::train).imbalance_ratio, 1.0);
  for (auto s : {corpus::Split::val, corpus::Split::test}) {
    const auto a = f.data.in_split(s), b = merged.in_split(s);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i]->tokens, b[i]->tokens);
      EXPECT_EQ(a[i]->label, b[i]->label);
      EXPECT_EQ(b[i]->provenance, corpus::Provenance::real);
    }
  }
  EXPECT_EQ(jsonl_bytes(merged, f.vocab, "merge_a.jsonl"),
            jsonl_bytes(bal::merge_balanced(f.data, res.records, 4), f.vocab, "merge_b.jsonl"));
  const auto again = bal::generate_minority(bal::GeneratorBundle::shared(trained_shared()), plan, f.data, 9);
  EXPECT_EQ(jsonl_bytes(bal::merge_balanced(f.data, again.records, 4), f.vocab, "merge_c.jsonl"),
            jsonl_bytes(merged, f.vocab, "merge_a.jsonl"));
}

TEST(Merge, IdentityAndRejections) {
  const auto& f = imbalanced().f;
  const auto same = bal::merge_balanced(f.data, {}, 3);
  ASSERT_EQ(same.records.size(), f.data.records.size());
  for (std::size_t i = 0; i < same.records.size(); ++i) EXPECT_EQ(same.records[i].tokens, f.data.records[i].tokens);
  corpus::Record leak{1, {5, 6}, corpus::Provenance::synthetic, corpus::Split::test};
  EXPECT_THROW(bal::merge_balanced(f.data, {leak}, 3), std::invalid_argument);
  corpus::Record unmarked{1, {5, 6}, corpus::Provenance::real, corpus::Split::train};
  EXPECT_THROW(bal::merge_balanced(f.data, {unmarked}, 3), std::invalid_argument);
  auto dirty = f.data;
  dirty.records.push_back(leak);
  EXPECT_THROW(bal::assert_hygiene(dirty), std::logic_error);
}

TEST(Duplicate, CopiesRealTrainRecordsUpToQuota) {
  const auto& f = imbalanced().f;
  const auto plan = bal::compute_plan(corpus::class_stats(f.data, corpus::Split::train));
  const auto dups = bal::duplicate_minority(f.data, plan, 5);
  ASSERT_EQ(dups.size(), 990u);
  std::set<std::vector<int>> train_real;
  for (const auto& r : f.data.records)
    if (r.split == corpus::Split::train) train_real.insert(r.tokens);
  for (const auto& r : dups) {
    EXPECT_EQ(r.provenance, corpus::Provenance::synthetic);
    EXPECT_EQ(train_real.count(r.tokens), 1u);
  }
  const auto merged = bal::merge_balanced(f.data, dups, 5);
  EXPECT_DOUBLE_EQ(corpus::class_stats(merged, corpus::Split::train).imbalance_ratio, 1.0);
}

TEST(Bundle, PerCategoryValidationAndReport) {
  gan::GeneratorConfig c = shared_config(10, 2, 6);
  c.conditioning = gan::Conditioning::instance;
  c.category = 1;
  EXPECT_THROW(bal::GeneratorBundle::per_category({gan::Generator(c, 1)}), std::invalid_argument);
  EXPECT_THROW(bal::GeneratorBundle::shared(gan::Generator(c, 1)), std::invalid_argument);
  auto c0 = c;
  c0.category = 0;
  const auto b = bal::GeneratorBundle::per_category({gan::Generator(c0, 1), gan::Generator(c, 2)});
  EXPECT_EQ(b.num_categories(), 2u);
  EXPECT_EQ(b.sample(1, 5, 3).size(), 5u);
  EXPECT_THROW(b.for_category(2), std::out_of_range);

  const auto plan = bal::compute_plan(corpus::class_stats({"pos", "neg"}, {10, 4}));
  const auto j = bal::plan_report_json(plan, {});
  EXPECT_EQ(j["categories"][1]["deficit"], 6);
  EXPECT_FALSE(j["categories"][1].contains("accepted"));
}
