#include "sentiaug/corpus/synth.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "sentiaug/numerics/random.hpp"

namespace sentiaug::corpus {

namespace {

constexpr std::uint64_t kSynthStream = 0x5e7f;

std::vector<double> zipf_weights(std::size_t n, double s) {
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / std::pow(static_cast<double>(r + 1), s);
  return w;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

std::vector<text::RawRecord> synth_corpus(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.categories.empty()) throw std::invalid_argument("synth_corpus: no categories");
  if (spec.noise < 0.0 || spec.noise > 1.0) throw std::invalid_argument("synth_corpus: noise must lie in [0, 1]");
  std::unordered_map<std::string, std::string> owner;
  for (const auto& w : spec.shared) owner.emplace(w, "<shared>");
  for (const auto& cat : spec.categories) {
    if (cat.lexicon.empty()) throw std::invalid_argument("synth_corpus: category '" + cat.label + "' has an empty lexicon");
    if (cat.templates.empty()) throw std::invalid_argument("synth_corpus: category '" + cat.label + "' has no templates");
    for (const auto& w : cat.lexicon) {
      auto [it, fresh] = owner.emplace(w, cat.label);
      if (!fresh && it->second != cat.label) {
        throw std::invalid_argument("synth_corpus: word '" + w + "' appears in lexicons of '" + cat.label + "' and '" +
                                    it->second + "'");
      }
    }
    for (const auto& t : cat.templates) {
      if (t.find("{cat}") == std::string::npos) {
        throw std::invalid_argument("synth_corpus: template '" + t + "' has no {cat} slot");
      }
      if (t.find("{any}") != std::string::npos && spec.shared.empty()) {
        throw std::invalid_argument("synth_corpus: template '" + t + "' uses {any} but the shared lexicon is empty");
      }
    }
  }
  const auto shared_w = zipf_weights(spec.shared.size(), spec.zipf);

  std::vector<text::RawRecord> out;
  for (std::size_t c = 0; c < spec.categories.size(); ++c) {
    const auto& cat = spec.categories[c];
    num::Rng rng(num::derive_seed(seed, kSynthStream, c));
    const auto cat_w = zipf_weights(cat.lexicon.size(), spec.zipf);
    std::vector<std::vector<std::string>> templates;
    for (const auto& t : cat.templates) templates.push_back(split_words(t));
    for (std::size_t i = 0; i < cat.count; ++i) {
      const auto& tmpl = templates[rng.index(templates.size())];
      std::string textv;
      for (const auto& slot : tmpl) {
        std::string word;
        if (slot == "{cat}") {
          if (!spec.shared.empty() && spec.noise > 0.0 && rng.uniform() < spec.noise) {
            word = spec.shared[rng.categorical(shared_w)];
          } else {
            word = cat.lexicon[rng.categorical(cat_w)];
          }
        } else if (slot == "{any}") {
          word = spec.shared[rng.categorical(shared_w)];
        } else {
          word = slot;
        }
        if (!textv.empty()) textv.push_back(' ');
        textv += word;
      }
      out.push_back({cat.label, std::move(textv), {}});
    }
  }
  return out;
}

}  // namespace sentiaug::corpus
