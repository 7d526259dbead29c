#include "sentiaug/corpus/labeled.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

#include "sentiaug/numerics/random.hpp"

namespace sentiaug::corpus {

namespace {

constexpr std::uint64_t kSplitStream = 0x5b117;

// Largest-remainder apportionment of n over ratios; ties go to the earlier split.
std::array<std::size_t, 3> apportion(std::size_t n, const SplitRatios& r) {
  const double share[3] = {r.train * static_cast<double>(n), r.val * static_cast<double>(n),
                           r.test * static_cast<double>(n)};
  std::array<std::size_t, 3> sizes{};
  std::size_t used = 0;
  for (int i = 0; i < 3; ++i) {
    sizes[i] = static_cast<std::size_t>(std::floor(share[i] + 1e-9));
    used += sizes[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return share[a] - static_cast<double>(sizes[a]) > share[b] - static_cast<double>(sizes[b]);
  });
  for (std::size_t k = 0; used < n; ++k, ++used) ++sizes[order[k % 3]];
  while (used > n) {
    for (int i = 2; i >= 0 && used > n; --i) {
      if (sizes[i] > 0) {
        --sizes[i];
        --used;
      }
    }
  }
  return sizes;
}

void shuffle_and_assign(LabeledCorpus& corpus, std::vector<std::size_t> idx, const SplitRatios& r,
                        std::uint64_t seed) {
  num::Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  const auto sizes = apportion(idx.size(), r);
  std::size_t k = 0;
  const Split kinds[3] = {Split::train, Split::val, Split::test};
  for (int s = 0; s < 3; ++s)
    for (std::size_t i = 0; i < sizes[s]; ++i) corpus.records[idx[k++]].split = kinds[s];
}

}  // namespace

std::string to_string(Provenance p) { return p == Provenance::real ? "real" : "synthetic"; }

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Provenance parse_provenance(const std::string& s) {
  if (s == "real") return Provenance::real;
  if (s == "synthetic") return Provenance::synthetic;
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw std::invalid_argument("unknown split '" + s + "'");
}

int LabeledCorpus::label_id(const std::string& name) const {
  auto it = std::find(label_names.begin(), label_names.end(), name);
  if (it == label_names.end()) throw std::out_of_range("unknown category '" + name + "'");
  return static_cast<int>(it - label_names.begin());
}

std::vector<const Record*> LabeledCorpus::in_split(Split s) const {
  std::vector<const Record*> out;
  for (const auto& r : records)
    if (r.split == s) out.push_back(&r);
  return out;
}

void LabeledCorpus::validate(std::size_t vocab_size) const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.label < 0 || static_cast<std::size_t>(r.label) >= label_names.size()) {
      throw std::logic_error("record " + std::to_string(i) + ": label id " + std::to_string(r.label) +
                             " outside the category list");
    }
    for (int t : r.tokens) {
      if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
        throw std::logic_error("record " + std::to_string(i) + ": token id " + std::to_string(t) +
                               " outside the vocabulary");
      }
    }
    if (r.provenance == Provenance::synthetic && r.split != Split::train) {
      throw std::logic_error("record " + std::to_string(i) + ": synthetic record in " + to_string(r.split));
    }
  }
}

LabeledCorpus encode_corpus(const std::vector<TextRecord>& records, const Vocab& vocab,
                            const std::vector<std::string>& label_names) {
  LabeledCorpus out;
  out.label_names = label_names;
  out.records.reserve(records.size());
  for (const auto& r : records) {
    out.records.push_back({out.label_id(r.label), vocab.encode(r.tokens), r.provenance, r.split});
  }
  return out;
}

std::vector<TextRecord> decode_corpus(const LabeledCorpus& corpus, const Vocab& vocab) {
  std::vector<TextRecord> out;
  out.reserve(corpus.records.size());
  for (const auto& r : corpus.records) {
    out.push_back({corpus.label_names.at(static_cast<std::size_t>(r.label)), vocab.decode(r.tokens), r.provenance,
                   r.split});
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<TextRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) {
    nlohmann::json j = {{"label", r.label},
                        {"tokens", r.tokens},
                        {"provenance", to_string(r.provenance)},
                        {"split", to_string(r.split)}};
    out << j.dump() << '\n';
  }
}

std::vector<TextRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<TextRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.push_back({j.at("label").get<std::string>(), j.at("tokens").get<text::TokenList>(),
                     parse_provenance(j.value("provenance", "real")), parse_split(j.value("split", "train"))});
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

double ClassStats::ratio(const std::string& a, const std::string& b) const {
  auto pos = [&](const std::string& n) {
    auto it = std::find(labels.begin(), labels.end(), n);
    if (it == labels.end()) throw std::out_of_range("unknown category '" + n + "'");
    return static_cast<std::size_t>(it - labels.begin());
  };
  return ratios[pos(a)][pos(b)];
}

std::size_t ClassStats::count(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw std::out_of_range("unknown category '" + label + "'");
  return counts[static_cast<std::size_t>(it - labels.begin())];
}

ClassStats class_stats(const std::vector<std::string>& labels, const std::vector<std::size_t>& counts) {
  if (labels.empty() || labels.size() != counts.size()) {
    throw std::invalid_argument("class_stats: need one count per category");
  }
  ClassStats s;
  s.labels = labels;
  s.counts = counts;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) throw std::invalid_argument("class_stats: category '" + labels[i] + "' has no records");
    s.total += counts[i];
    if (counts[i] > counts[s.majority]) s.majority = i;
    if (counts[i] < counts[s.minority]) s.minority = i;
  }
  s.imbalance_ratio = static_cast<double>(counts[s.majority]) / static_cast<double>(counts[s.minority]);
  s.ratios.assign(counts.size(), std::vector<double>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = 0; j < counts.size(); ++j)
      s.ratios[i][j] = static_cast<double>(counts[i]) / static_cast<double>(counts[j]);
  return s;
}

ClassStats class_stats(const std::map<std::string, std::size_t>& counts) {
  std::vector<std::string> labels;
  std::vector<std::size_t> values;
  for (const auto& [k, v] : counts) {
    labels.push_back(k);
    values.push_back(v);
  }
  return class_stats(labels, values);
}

ClassStats class_stats(const LabeledCorpus& corpus) {
  std::vector<std::size_t> counts(corpus.label_names.size(), 0);
  for (const auto& r : corpus.records) ++counts.at(static_cast<std::size_t>(r.label));
  return class_stats(corpus.label_names, counts);
}

ClassStats class_stats(const LabeledCorpus& corpus, Split split) {
  std::vector<std::size_t> counts(corpus.label_names.size(), 0);
  for (const auto& r : corpus.records)
    if (r.split == split) ++counts.at(static_cast<std::size_t>(r.label));
  return class_stats(corpus.label_names, counts);
}

void assign_splits(LabeledCorpus& corpus, SplitRatios ratios, std::uint64_t seed, bool stratified) {
  if (ratios.train <= 0 || ratios.val <= 0 || ratios.test <= 0) {
    throw std::invalid_argument("assign_splits: every ratio must be positive");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw std::invalid_argument("assign_splits: ratios must sum to 1");
  }
  std::vector<std::vector<std::size_t>> by_label(corpus.label_names.size());
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    auto& r = corpus.records[i];
    if (r.provenance == Provenance::synthetic) {
      r.split = Split::train;
      continue;
    }
    by_label.at(static_cast<std::size_t>(r.label)).push_back(i);
    all.push_back(i);
  }
  if (!stratified) {
    if (all.size() < 3) throw std::invalid_argument("assign_splits: fewer real records than splits");
    shuffle_and_assign(corpus, all, ratios, num::derive_seed(seed, kSplitStream));
    return;
  }
  for (std::size_t c = 0; c < by_label.size(); ++c) {
    if (by_label[c].size() < 3) {
      throw std::invalid_argument("assign_splits: category '" + corpus.label_names[c] + "' has " +
                                  std::to_string(by_label[c].size()) + " records, fewer than the 3 splits");
    }
    shuffle_and_assign(corpus, by_label[c], ratios, num::derive_seed(seed, kSplitStream, c));
  }
}

}  // namespace sentiaug::corpus
