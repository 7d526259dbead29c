#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracles/overlap_classifier.hpp"
#include "sentiaug/corpus/dataset.hpp"
#include "sentiaug/corpus/labeled.hpp"
#include "sentiaug/corpus/synth.hpp"
#include "sentiaug/corpus/tfidf.hpp"
#include "sentiaug/corpus/vocab.hpp"

namespace corpus = sentiaug::corpus;
namespace text = sentiaug::text;
using corpus::Schema;

namespace {

corpus::LoadResult load_string(const std::string& csv, Schema schema) {
  std::istringstream in(csv);
  return corpus::read_dataset(in, schema, corpus::LabelingRule::defaults(schema));
}

}  // namespace

TEST(Csv, QuotingAndNewlines) {
  std::istringstream in("a,b\r\n\"x, y\",\"he said \"\"hi\"\"\nagain\"\r\n\n3,\n");
  std::vector<corpus::RowError> errors;
  auto rows = corpus::parse_csv(in, errors);
  ASSERT_TRUE(errors.empty());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].fields, (std::vector<std::string>{"x, y", "he said \"hi\"\nagain"}));
  EXPECT_EQ(rows[1].line, 2u);
  EXPECT_EQ(rows[2].fields, (std::vector<std::string>{"3", ""}));
  EXPECT_EQ(rows[2].line, 5u);
}

TEST(Csv, UnterminatedQuoteReported) {
  std::istringstream in("a,b\n1,\"open\n");
  std::vector<corpus::RowError> errors;
  corpus::parse_csv(in, errors);
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].line, 2u);
}

TEST(Csv, EscapeRoundTrip) {
  const std::vector<std::string> fields = {"plain", "with,comma", "with \"quote\"", "multi\nline"};
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + corpus::csv_escape(fields[i]);
  std::istringstream in(line + "\n");
  std::vector<corpus::RowError> errors;
  auto rows = corpus::parse_csv(in, errors);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].fields, fields);
}

TEST(LoadDataset, Rated5Rule) {
  auto r = load_string(
      "rating,review\n"
      "5,\"This class is very helpful to me, thanks\"\n"
      "3,okay course\n"
      "1,boring\n"
      "4.0,fine\n"
      "0,out of domain\n"
      "x,not a number\n"
      "2,\n",
      Schema::rated5);
  ASSERT_EQ(r.records.size(), 4u);
  EXPECT_EQ(r.records[0].label, "positive");
  EXPECT_EQ(r.records[0].extra.at("rating"), "5");
  EXPECT_EQ(r.records[1].label, "neutral");
  EXPECT_EQ(r.records[2].label, "negative");
  EXPECT_EQ(r.records[3].label, "positive");
  ASSERT_EQ(r.errors.size(), 3u);
  EXPECT_EQ(r.errors[0].line, 6u);
  EXPECT_NE(r.errors[0].message.find("rating 0"), std::string::npos);
  EXPECT_EQ(r.errors[1].line, 7u);
  EXPECT_EQ(r.errors[2].line, 8u);
}

TEST(LoadDataset, Labeled3KeepsExtrasAndRejectsUnknownLabels) {
  auto r = load_string(
      "course,label,review,aspect\n"
      "ml-101,Positive,end of course project was challenging and fun.,Content\n"
      "ml-101,NEU,it was fine,General\n"
      "ml-102,negative,too fast,Instructor\n"
      "ml-102,mixed,unsure,General\n"
      "ml-103,positive,short row\n",
      Schema::labeled3);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.records[0].label, "positive");
  EXPECT_EQ(r.records[0].extra.at("course"), "ml-101");
  EXPECT_EQ(r.records[0].extra.at("aspect"), "Content");
  EXPECT_EQ(r.records[1].label, "neutral");
  ASSERT_EQ(r.errors.size(), 2u);
  EXPECT_EQ(r.errors[0].line, 5u);
  EXPECT_EQ(r.errors[1].line, 6u);
}

TEST(LoadDataset, Labeled2RejectsNeutralAndMissingColumns) {
  auto r = load_string("label,review\npositive,good\nneutral,meh\nnegative,bad\n", Schema::labeled2);
  EXPECT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.errors.size(), 1u);
  EXPECT_THROW(load_string("rating,text\n5,x\n", Schema::rated5), corpus::DatasetError);
  EXPECT_THROW(load_string("", Schema::labeled2), corpus::DatasetError);
  EXPECT_THROW(corpus::load_dataset("/nonexistent/file.csv", Schema::labeled2), corpus::DatasetError);
}

TEST(LoadDataset, SchemaNames) {
  for (auto s : {Schema::labeled3, Schema::rated5, Schema::labeled2})
    EXPECT_EQ(corpus::parse_schema(corpus::schema_name(s)), s);
  EXPECT_THROW(corpus::parse_schema("rated10"), std::invalid_argument);
  EXPECT_EQ(corpus::LabelingRule::defaults(Schema::rated5).categories(),
            (std::vector<std::string>{"positive", "neutral", "negative"}));
  EXPECT_EQ(corpus::LabelingRule::defaults(Schema::labeled2).categories(),
            (std::vector<std::string>{"positive", "negative"}));
}

TEST(Vocab, FrequencyOrderAndReservedIds) {
  auto v = corpus::Vocab::build({{"a", "a", "b"}}, 6);
  EXPECT_EQ(v.id("<pad>"), corpus::kPad);
  EXPECT_EQ(v.id("<bos>"), corpus::kBos);
  EXPECT_EQ(v.id("<eos>"), corpus::kEos);
  EXPECT_EQ(v.id("<unk>"), corpus::kUnk);
  EXPECT_EQ(v.id("a"), 4);
  EXPECT_EQ(v.id("b"), 5);
  EXPECT_EQ(v.size(), 6u);
}

TEST(Vocab, MinFreqMaxSizeAndTies) {
  auto v = corpus::Vocab::build({{"a", "a", "b"}}, 6, 2);
  EXPECT_EQ(v.id("b"), corpus::kUnk);
  auto tie = corpus::Vocab::build({{"z", "y", "x", "y", "z"}}, 100);
  EXPECT_EQ(tie.id("z"), 4);
  EXPECT_EQ(tie.id("y"), 5);
  EXPECT_EQ(tie.id("x"), 6);
  auto capped = corpus::Vocab::build({{"z", "y", "x", "y", "z"}}, 5);
  EXPECT_EQ(capped.size(), 5u);
  EXPECT_EQ(capped.id("y"), corpus::kUnk);
  EXPECT_THROW(corpus::Vocab::build({{"a"}}, 3), std::invalid_argument);
}

TEST(Vocab, DeterministicAndJsonRoundTrip) {
  std::vector<text::TokenList> streams = {{"the", "course", "was", "great"}, {"great", "teacher"}};
  auto a = corpus::Vocab::build(streams, 50);
  auto b = corpus::Vocab::build(streams, 50);
  ASSERT_EQ(a.size(), b.size());
  for (int i = 0; i < static_cast<int>(a.size()); ++i) EXPECT_EQ(a.token(i), b.token(i));
  auto c = corpus::Vocab::from_json(nlohmann::json::parse(a.to_json().dump()));
  ASSERT_EQ(c.size(), a.size());
  for (int i = 0; i < static_cast<int>(a.size()); ++i) EXPECT_EQ(c.token(i), a.token(i));
  EXPECT_THROW(a.token(999), std::out_of_range);
}

TEST(Vocab, EncodeDecodeProperties) {
  std::mt19937_64 gen(4);
  const std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "eps", "!", "zeta"};
  std::vector<text::TokenList> streams;
  for (int i = 0; i < 50; ++i) {
    text::TokenList t;
    for (int k = 0; k < 8; ++k) t.push_back(words[gen() % 6]);  // "zeta" never enters the vocab
    streams.push_back(t);
  }
  auto v = corpus::Vocab::build(streams, 100);
  for (const auto& s : streams) EXPECT_EQ(v.decode(v.encode(s)), s);
  text::TokenList with_oov = {"alpha", "zeta", "beta"};
  EXPECT_EQ(v.decode(v.encode(with_oov)), (text::TokenList{"alpha", "<unk>", "beta"}));
}

TEST(Vocab, GeneratorSequenceCapsWithEos) {
  std::vector<int> ids(40, 7);
  auto seq = corpus::generator_sequence(ids);
  ASSERT_EQ(seq.size(), 32u);
  EXPECT_EQ(seq.back(), corpus::kEos);
  EXPECT_EQ(corpus::generator_sequence({5, 6}, 32), (std::vector<int>{5, 6, corpus::kEos}));
}

TEST(ClassStats, QuotedCounts) {
  auto s = corpus::class_stats(std::map<std::string, std::size_t>{
      {"positive", 18746}, {"negative", 2316}, {"neutral", 1145}});
  EXPECT_NEAR(s.ratio("positive", "negative"), 8.094, 5e-4);
  EXPECT_EQ(s.labels[s.majority], "positive");
  EXPECT_EQ(s.labels[s.minority], "neutral");
  EXPECT_EQ(s.total, 18746u + 2316u + 1145u);
  auto s2 = corpus::class_stats(std::map<std::string, std::size_t>{{"positive", 74191}, {"minority", 2602}});
  EXPECT_NEAR(s2.imbalance_ratio, 28.51, 5e-3);
  auto s3 = corpus::class_stats(std::map<std::string, std::size_t>{{"a", 100000}, {"b", 100000}});
  EXPECT_EQ(s3.imbalance_ratio, 1.0);
  EXPECT_THROW(corpus::class_stats(std::map<std::string, std::size_t>{}), std::invalid_argument);
  EXPECT_THROW(corpus::class_stats(std::map<std::string, std::size_t>{{"a", 0}, {"b", 3}}), std::invalid_argument);
}

namespace {

corpus::LabeledCorpus make_corpus(const std::vector<std::size_t>& per_label) {
  corpus::LabeledCorpus c;
  for (std::size_t l = 0; l < per_label.size(); ++l) {
    c.label_names.push_back("c" + std::to_string(l));
    for (std::size_t i = 0; i < per_label[l]; ++i)
      c.records.push_back({static_cast<int>(l), {4, 5}, corpus::Provenance::real, corpus::Split::train});
  }
  return c;
}

std::map<std::pair<int, corpus::Split>, std::size_t> tally(const corpus::LabeledCorpus& c) {
  std::map<std::pair<int, corpus::Split>, std::size_t> out;
  for (const auto& r : c.records) ++out[{r.label, r.split}];
  return out;
}

}  // namespace

TEST(Split, Sizes) {
  auto c = make_corpus({100});
  corpus::assign_splits(c, {0.8, 0.1, 0.1}, 1, false);
  auto t = tally(c);
  EXPECT_EQ((t[{0, corpus::Split::train}]), 80u);
  EXPECT_EQ((t[{0, corpus::Split::val}]), 10u);
  EXPECT_EQ((t[{0, corpus::Split::test}]), 10u);

  auto s = make_corpus({90, 10});
  corpus::assign_splits(s, {0.8, 0.1, 0.1}, 1, true);
  auto ts = tally(s);
  EXPECT_EQ((ts[{0, corpus::Split::train}]), 72u);
  EXPECT_EQ((ts[{1, corpus::Split::train}]), 8u);
}

TEST(Split, DeterministicUnderSeed) {
  auto a = make_corpus({40, 13, 7});
  auto b = make_corpus({40, 13, 7});
  corpus::assign_splits(a, {0.7, 0.1, 0.2}, 99, true);
  corpus::assign_splits(b, {0.7, 0.1, 0.2}, 99, true);
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i].split, b.records[i].split);
  auto d = make_corpus({40, 13, 7});
  corpus::assign_splits(d, {0.7, 0.1, 0.2}, 100, true);
  bool differs = false;
  for (std::size_t i = 0; i < a.records.size(); ++i) differs |= a.records[i].split != d.records[i].split;
  EXPECT_TRUE(differs);
}

TEST(Split, Errors) {
  auto c = make_corpus({50, 2});
  try {
    corpus::assign_splits(c, {0.8, 0.1, 0.1}, 1, true);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("'c1'"), std::string::npos);
  }
  auto d = make_corpus({50});
  EXPECT_THROW(corpus::assign_splits(d, {0.8, 0.1, 0.2}, 1, true), std::invalid_argument);
  EXPECT_THROW(corpus::assign_splits(d, {1.0, 0.0, 0.0}, 1, true), std::invalid_argument);
}

TEST(SplitProperty, StratifiedWithinOneRecord) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> sizes;
    const std::size_t k = 1 + gen() % 4;
    for (std::size_t i = 0; i < k; ++i) sizes.push_back(3 + gen() % 300);
    double a = 0.1 + (gen() % 800) / 1000.0, b = (1.0 - a) * (0.05 + (gen() % 900) / 1000.0);
    corpus::SplitRatios r{a, b, 1.0 - a - b};
    auto c = make_corpus(sizes);
    c.records.push_back({0, {4}, corpus::Provenance::synthetic, corpus::Split::test});
    corpus::assign_splits(c, r, gen(), true);
    EXPECT_NO_THROW(c.validate(10));
    c.records.pop_back();
    auto t = tally(c);
    for (std::size_t l = 0; l < k; ++l) {
      const double n = static_cast<double>(sizes[l]);
      EXPECT_LE(std::abs(static_cast<double>(t[{int(l), corpus::Split::train}]) - r.train * n), 1.0);
      EXPECT_LE(std::abs(static_cast<double>(t[{int(l), corpus::Split::val}]) - r.val * n), 1.0);
      EXPECT_LE(std::abs(static_cast<double>(t[{int(l), corpus::Split::test}]) - r.test * n), 1.0);
    }
  }
}

TEST(LabeledCorpus, ValidateCatchesBrokenInvariants) {
  auto c = make_corpus({3});
  EXPECT_NO_THROW(c.validate(6));
  EXPECT_THROW(c.validate(5), std::logic_error);
  c.records[0].split = corpus::Split::val;
  c.records[0].provenance = corpus::Provenance::synthetic;
  EXPECT_THROW(c.validate(6), std::logic_error);
  c.records[0].provenance = corpus::Provenance::real;
  c.records[0].label = 4;
  EXPECT_THROW(c.validate(6), std::logic_error);
}

TEST(LabeledCorpus, JsonlRoundTrip) {
  std::vector<corpus::TextRecord> recs = {
      {"positive", {"great", "course", "!"}, corpus::Provenance::real, corpus::Split::train},
      {"negative", {"\"quoted\"", "café"}, corpus::Provenance::synthetic, corpus::Split::train},
      {"neutral", {}, corpus::Provenance::real, corpus::Split::test}};
  const auto path = std::filesystem::temp_directory_path() / "sentiaug_corpus_test.jsonl";
  corpus::write_jsonl(path, recs);
  auto back = corpus::read_jsonl(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].label, recs[i].label);
    EXPECT_EQ(back[i].tokens, recs[i].tokens);
    EXPECT_EQ(back[i].provenance, recs[i].provenance);
    EXPECT_EQ(back[i].split, recs[i].split);
  }
  auto v = corpus::Vocab::build({recs[0].tokens, recs[1].tokens}, 100);
  auto enc = corpus::encode_corpus(recs, v, {"positive", "neutral", "negative"});
  EXPECT_EQ(enc.records[1].label, 2);
  auto dec = corpus::decode_corpus(enc, v);
  EXPECT_EQ(dec[0].tokens, recs[0].tokens);
}

namespace {

// Independent TF-IDF over surface strings.
double naive_tfidf(const std::vector<std::vector<std::string>>& docs, std::size_t d, const std::string& term) {
  double tf = 0, df = 0;
  for (const auto& w : docs[d]) tf += w == term;
  for (const auto& doc : docs) df += std::find(doc.begin(), doc.end(), term) != doc.end();
  return df == 0 ? 0.0 : tf * std::log(static_cast<double>(docs.size()) / df);
}

}  // namespace

TEST(Tfidf, HandComputedExample) {
  auto v = corpus::Vocab::build({{"a", "a", "b"}, {"a", "c"}}, 10);
  std::vector<std::vector<int>> docs = {v.encode({"a", "a", "b"}), v.encode({"a", "c"})};
  auto rows = corpus::featurize_tfidf(docs, v.size());
  EXPECT_NEAR(rows[0].weight(v.id("b")), 0.6931471805599453, 1e-12);
  EXPECT_EQ(rows[0].weight(v.id("a")), 0.0);
  EXPECT_EQ(rows[0].weight(v.id("c")), 0.0);
  EXPECT_NEAR(rows[1].weight(v.id("c")), 0.6931471805599453, 1e-12);
}

TEST(TfidfProperty, MatchesNaiveOracleAndIsNonnegative) {
  std::mt19937_64 gen(12);
  const std::vector<std::string> words = {"w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<std::string>> docs(2 + gen() % 8);
    for (auto& d : docs) {
      const std::size_t n = gen() % 10;
      for (std::size_t i = 0; i < n; ++i) d.push_back(words[gen() % words.size()]);
      d.push_back("common");
    }
    auto v = corpus::Vocab::build(docs, 100);
    std::vector<std::vector<int>> ids;
    for (const auto& d : docs) ids.push_back(v.encode(d));
    corpus::TfidfModel m;
    m.fit(ids, v.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
      auto row = m.transform(ids[d]);
      for (const auto& [t, w] : row.entries) EXPECT_GT(w, 0.0);
      for (const auto& w : words) EXPECT_NEAR(row.weight(v.id(w)), naive_tfidf(docs, d, w), 1e-12);
      EXPECT_EQ(row.weight(v.id("common")), 0.0);
    }
    auto normed = m.transform(ids[0], true);
    double sq = 0;
    for (const auto& [t, w] : normed.entries) sq += w * w;
    if (!normed.entries.empty()) {
      EXPECT_NEAR(sq, 1.0, 1e-12);
    }
  }
}

namespace {

corpus::SynthSpec two_class_spec(std::size_t pos, std::size_t neg) {
  corpus::SynthSpec spec;
  spec.shared = {"course", "the", "was", "teacher"};
  spec.categories = {{"positive", pos, {"great", "fun", "clear", "helpful"}, {"the course was {cat}", "{cat} {any} {cat}"}},
                     {"negative", neg, {"boring", "awful", "confusing"}, {"{any} was {cat}", "{cat} {cat}"}}};
  return spec;
}

}  // namespace

TEST(Synth, CountsAndImbalance) {
  auto recs = corpus::synth_corpus(two_class_spec(2000, 100), 5);
  std::map<std::string, std::size_t> counts;
  for (const auto& r : recs) ++counts[r.label];
  EXPECT_EQ(corpus::class_stats(counts).imbalance_ratio, 20.0);
}

TEST(Synth, OverlapOraclePerfectOnDisjointLexicons) {
  const auto spec = two_class_spec(300, 300);
  auto recs = corpus::synth_corpus(spec, 11);
  oracle::OverlapClassifier clf;
  for (const auto& c : spec.categories) clf.add(c.label, c.lexicon);
  std::size_t correct = 0;
  for (const auto& r : recs) correct += clf.classify(r.text) == r.label;
  EXPECT_EQ(correct, recs.size());
}

TEST(Synth, DeterministicAndValidated) {
  auto a = corpus::synth_corpus(two_class_spec(50, 20), 3);
  auto b = corpus::synth_corpus(two_class_spec(50, 20), 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].text, b[i].text);
  auto c = corpus::synth_corpus(two_class_spec(50, 20), 4);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].text != c[i].text;
  EXPECT_TRUE(differs);

  auto empty = two_class_spec(5, 5);
  empty.categories[1].lexicon.clear();
  EXPECT_THROW(corpus::synth_corpus(empty, 1), std::invalid_argument);
  auto overlap = two_class_spec(5, 5);
  overlap.categories[1].lexicon.push_back("fun");
  EXPECT_THROW(corpus::synth_corpus(overlap, 1), std::invalid_argument);
  auto no_slot = two_class_spec(5, 5);
  no_slot.categories[0].templates = {"the course"};
  EXPECT_THROW(corpus::synth_corpus(no_slot, 1), std::invalid_argument);
}

TEST(Synth, ZipfSkewsWordFrequencies) {
  auto spec = two_class_spec(3000, 3);
  spec.zipf = 1.5;
  auto recs = corpus::synth_corpus(spec, 2);
  std::map<std::string, std::size_t> freq;
  for (const auto& r : recs) {
    std::istringstream in(r.text);
    for (std::string w; in >> w;) ++freq[w];
  }
  EXPECT_GT(freq["great"], freq["fun"]);
  EXPECT_GT(freq["fun"], freq["helpful"]);
}
