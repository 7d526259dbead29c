#include "sentiaug/corpus/vocab.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace sentiaug::corpus {

Vocab::Vocab() {
  for (const char* t : {"<pad>", "<bos>", "<eos>", "<unk>"}) add(t);
  max_size_ = kReserved;
}

void Vocab::add(const std::string& token) {
  stoi_.emplace(token, static_cast<int>(itos_.size()));
  itos_.push_back(token);
}

Vocab Vocab::build(const std::vector<text::TokenList>& streams, std::size_t max_size, std::size_t min_freq) {
  if (max_size < kReserved) {
    throw std::invalid_argument("Vocab::build: max_size " + std::to_string(max_size) + " leaves no room for the " +
                                std::to_string(kReserved) + " reserved ids");
  }
  struct Entry {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Entry> freq;
  std::vector<std::string> order;
  for (const auto& stream : streams) {
    for (const auto& tok : stream) {
      auto [it, fresh] = freq.try_emplace(tok, Entry{0, order.size()});
      if (fresh) order.push_back(tok);
      ++it->second.count;
    }
  }
  std::vector<std::string> kept;
  Vocab probe;
  for (const auto& tok : order) {
    if (probe.contains(tok)) continue;  // reserved surface forms
    if (freq[tok].count >= std::max<std::size_t>(min_freq, 1)) kept.push_back(tok);
  }
  std::stable_sort(kept.begin(), kept.end(), [&](const std::string& a, const std::string& b) {
    return freq[a].count > freq[b].count;
  });
  Vocab v;
  v.max_size_ = max_size;
  v.min_freq_ = min_freq;
  for (const auto& tok : kept) {
    if (v.size() >= max_size) break;
    v.add(tok);
  }
  return v;
}

int Vocab::id(const std::string& token) const {
  auto it = stoi_.find(token);
  return it == stoi_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= itos_.size()) {
    throw std::out_of_range("Vocab::token: id " + std::to_string(id) + " outside [0, " + std::to_string(size()) + ")");
  }
  return itos_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::encode(const text::TokenList& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

text::TokenList Vocab::decode(const std::vector<int>& ids) const {
  text::TokenList out;
  for (int i : ids) {
    if (i == kEos) break;
    if (i == kPad || i == kBos) continue;
    out.push_back(token(i));
  }
  return out;
}

nlohmann::json Vocab::to_json() const {
  return {{"max_size", max_size_}, {"min_freq", min_freq_}, {"tokens", itos_}};
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  const auto tokens = j.at("tokens").get<std::vector<std::string>>();
  Vocab v;
  if (tokens.size() < kReserved) throw std::invalid_argument("Vocab::from_json: missing reserved tokens");
  for (std::size_t i = 0; i < kReserved; ++i) {
    if (tokens[i] != v.itos_[i]) throw std::invalid_argument("Vocab::from_json: reserved token mismatch at " + std::to_string(i));
  }
  for (std::size_t i = kReserved; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw std::invalid_argument("Vocab::from_json: duplicate token '" + tokens[i] + "'");
    v.add(tokens[i]);
  }
  v.max_size_ = j.value("max_size", tokens.size());
  v.min_freq_ = j.value("min_freq", std::size_t{1});
  return v;
}

std::vector<int> generator_sequence(const std::vector<int>& ids, std::size_t max_len) {
  if (max_len < 1) throw std::invalid_argument("generator_sequence: max_len must be positive");
  std::vector<int> out(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), max_len - 1)));
  out.push_back(kEos);
  return out;
}

}  // namespace sentiaug::corpus
