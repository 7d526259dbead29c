#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sentiaug/corpus/vocab.hpp"
#include "sentiaug/textprep/textprep.hpp"

namespace sentiaug::corpus {

enum class Provenance { real, synthetic };
enum class Split { train, val, test };

std::string to_string(Provenance p);
std::string to_string(Split s);
Provenance parse_provenance(const std::string& s);
Split parse_split(const std::string& s);

// A cleaned record before vocabulary encoding.
struct TextRecord {
  std::string label;
  text::TokenList tokens;
  Provenance provenance = Provenance::real;
  Split split = Split::train;
};

struct Record {
  int label = 0;
  std::vector<int> tokens;
  Provenance provenance = Provenance::real;
  Split split = Split::train;
};

struct LabeledCorpus {
  std::vector<Record> records;
  std::vector<std::string> label_names;

  std::size_t num_categories() const { return label_names.size(); }
  int label_id(const std::string& name) const;  // throws std::out_of_range
  std::vector<const Record*> in_split(Split s) const;
  // Throws std::logic_error on any broken invariant.
  void validate(std::size_t vocab_size) const;
};

LabeledCorpus encode_corpus(const std::vector<TextRecord>& records, const Vocab& vocab,
                            const std::vector<std::string>& label_names);
std::vector<TextRecord> decode_corpus(const LabeledCorpus& corpus, const Vocab& vocab);

// JSON lines: {"label": ..., "tokens": [...], "provenance": ..., "split": ...}
void write_jsonl(const std::filesystem::path& path, const std::vector<TextRecord>& records);
std::vector<TextRecord> read_jsonl(const std::filesystem::path& path);

struct ClassStats {
  std::vector<std::string> labels;
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  std::size_t majority = 0;
  std::size_t minority = 0;
  double imbalance_ratio = 1.0;
  // ratios[i][j] = counts[i] / counts[j]
  std::vector<std::vector<double>> ratios;

  double ratio(const std::string& a, const std::string& b) const;
  std::size_t count(const std::string& label) const;
};

// Every category must be nonempty. Count ties for majority/minority go to the lower index.
ClassStats class_stats(const std::vector<std::string>& labels, const std::vector<std::size_t>& counts);
ClassStats class_stats(const std::map<std::string, std::size_t>& counts);
ClassStats class_stats(const LabeledCorpus& corpus);
ClassStats class_stats(const LabeledCorpus& corpus, Split split);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

// Assigns train/val/test to real records; synthetic records stay in train.
// Per-split sizes use largest-remainder rounding (per category when stratified).
void assign_splits(LabeledCorpus& corpus, SplitRatios ratios, std::uint64_t seed, bool stratified = true);

}  // namespace sentiaug::corpus
