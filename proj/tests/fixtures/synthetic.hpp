#pragma once

// Seeded synthetic corpora with disjoint per-category lexicons, encoded and split.

#include <string>
#include <vector>

#include "oracles/overlap_classifier.hpp"
#include "sentiaug/corpus/labeled.hpp"
#include "sentiaug/corpus/synth.hpp"
#include "sentiaug/corpus/vocab.hpp"
#include "sentiaug/gantext/generator.hpp"
#include "sentiaug/genmetrics/metrics.hpp"
#include "sentiaug/textprep/textprep.hpp"

namespace fixture {

namespace corpus = sentiaug::corpus;
namespace gan = sentiaug::gan;
namespace text = sentiaug::text;

struct Fixture {
  corpus::SynthSpec spec;
  corpus::Vocab vocab;
  corpus::LabeledCorpus data;
};

inline std::vector<std::string> words(const std::string& stem, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

// Three categories of `per_category` records, ~200 word types, at most 16 tokens.
inline corpus::SynthSpec three_category_spec(std::size_t per_category = 1000) {
  corpus::SynthSpec s;
  s.shared = words("w", 46);
  const std::vector<std::string> templates = {
      "{any} {cat} {cat}",
      "{any} {any} {cat} {any} {cat}",
      "{cat} {any} {cat} {any} {any} {cat} {any}",
      "{any} {cat} {any} {any} {cat} {cat} {any} {any} {cat} {any}",
      "{cat} {any} {any} {cat} {any} {cat} {any} {any} {cat} {any} {any} {cat} {any}",
      "{any} {any} {cat} {any} {cat} {any} {cat} {any} {any} {cat} {any} {cat} {any} {any} {cat} {any}"};
  s.categories = {{"positive", per_category, words("pos", 50), templates},
                  {"neutral", per_category, words("neu", 50), templates},
                  {"negative", per_category, words("neg", 50), templates}};
  s.zipf = 1.0;
  return s;
}

// Two categories with small disjoint lexicons and short templates.
inline corpus::SynthSpec two_category_spec(std::size_t per_category = 400) {
  corpus::SynthSpec s;
  s.shared = words("w", 12);
  const std::vector<std::string> templates = {"{any} {cat} {cat}", "{cat} {any} {cat} {any}",
                                              "{any} {any} {cat} {cat} {any}", "{cat} {any}"};
  s.categories = {{"positive", per_category, words("pos", 12), templates},
                  {"negative", per_category, words("neg", 12), templates}};
  s.zipf = 1.0;
  return s;
}

inline Fixture build(const corpus::SynthSpec& spec, std::uint64_t seed) {
  Fixture f;
  f.spec = spec;
  std::vector<corpus::TextRecord> recs;
  std::vector<text::TokenList> streams;
  for (const auto& r : corpus::synth_corpus(spec, seed)) {
    recs.push_back({r.label, text::tokenize(r.text), corpus::Provenance::real, corpus::Split::train});
    streams.push_back(recs.back().tokens);
  }
  f.vocab = corpus::Vocab::build(streams, 100000);
  std::vector<std::string> labels;
  for (const auto& c : spec.categories) labels.push_back(c.label);
  f.data = corpus::encode_corpus(recs, f.vocab, labels);
  corpus::assign_splits(f.data, {0.8, 0.1, 0.1}, seed, true);
  return f;
}

inline oracle::OverlapClassifier overlap_oracle(const corpus::SynthSpec& spec) {
  oracle::OverlapClassifier clf;
  for (const auto& c : spec.categories) clf.add(c.label, c.lexicon);
  return clf;
}

inline std::string join(const text::TokenList& toks) {
  std::string s;
  for (const auto& t : toks) s += (s.empty() ? "" : " ") + t;
  return s;
}

// Fraction of n fresh samples the overlap oracle assigns to `category`.
inline double purity(const gan::Generator& gen, int category, const Fixture& f, std::size_t n, std::uint64_t seed) {
  const auto clf = overlap_oracle(f.spec);
  const std::string& want = f.data.label_names.at(static_cast<std::size_t>(category));
  std::size_t hit = 0;
  const auto samples = sentiaug::metrics::sample_texts(gen, category, n, seed);
  for (const auto& s : samples) hit += clf.classify(join(f.vocab.decode(s))) == want;
  return static_cast<double>(hit) / static_cast<double>(samples.size());
}

}  // namespace fixture
