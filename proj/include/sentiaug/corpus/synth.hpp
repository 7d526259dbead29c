#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sentiaug/textprep/textprep.hpp"

namespace sentiaug::corpus {

// Templates are space-separated; "{cat}" draws from the category lexicon, "{any}" from the shared one.
struct SynthCategory {
  std::string label;
  std::size_t count = 0;
  std::vector<std::string> lexicon;
  std::vector<std::string> templates;
};

struct SynthSpec {
  std::vector<SynthCategory> categories;
  std::vector<std::string> shared;
  double noise = 0.0;   // chance a {cat} slot is filled from the shared lexicon instead
  double zipf = 0.0;    // word weight 1 / (rank + 1)^zipf within each lexicon
};

// Records come out grouped by category, in spec order. Throws std::invalid_argument on
// empty or overlapping lexicons and on templates without a {cat} slot.
std::vector<text::RawRecord> synth_corpus(const SynthSpec& spec, std::uint64_t seed);

}  // namespace sentiaug::corpus
