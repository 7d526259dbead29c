#include "sentiaug/advtrain/data.hpp"

#include "sentiaug/corpus/vocab.hpp"

namespace sentiaug::train {

const std::vector<Sequence>& GanData::heldout_or_train(int category) const {
  const auto c = static_cast<std::size_t>(category);
  return heldout.at(c).empty() ? train.at(c) : heldout.at(c);
}

GanData make_gan_data(const corpus::LabeledCorpus& corpus, std::size_t max_len, corpus::Split heldout_split) {
  GanData d;
  d.num_categories = corpus.label_names.size();
  d.train.resize(d.num_categories);
  d.heldout.resize(d.num_categories);
  for (const auto& r : corpus.records) {
    if (r.provenance != corpus::Provenance::real) continue;
    const auto c = static_cast<std::size_t>(r.label);
    if (r.split == corpus::Split::train) {
      d.train.at(c).push_back(corpus::generator_sequence(r.tokens, max_len));
    } else if (r.split == heldout_split) {
      d.heldout.at(c).push_back(corpus::generator_sequence(r.tokens, max_len));
    }
  }
  return d;
}

}  // namespace sentiaug::train
