#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sentiaug/textprep/textprep.hpp"

namespace sentiaug::corpus {

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr std::size_t kReserved = 4;

class Vocab {
 public:
  Vocab();

  // Keeps the most frequent tokens with count >= min_freq; max_size counts the 4 reserved ids.
  // Frequency ties go to the token seen first.
  static Vocab build(const std::vector<text::TokenList>& streams, std::size_t max_size, std::size_t min_freq = 1);

  std::size_t size() const { return itos_.size(); }
  int id(const std::string& token) const;  // kUnk when absent
  bool contains(const std::string& token) const { return stoi_.count(token) > 0; }
  const std::string& token(int id) const;

  std::vector<int> encode(const text::TokenList& tokens) const;
  text::TokenList decode(const std::vector<int>& ids) const;  // stops at the first EOS, skips PAD/BOS

  std::size_t max_size() const { return max_size_; }
  std::size_t min_freq() const { return min_freq_; }

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);

 private:
  void add(const std::string& token);

  std::unordered_map<std::string, int> stoi_;
  std::vector<std::string> itos_;
  std::size_t max_size_ = 0;
  std::size_t min_freq_ = 1;
};

// Content truncated to max_len - 1 tokens, then EOS.
std::vector<int> generator_sequence(const std::vector<int>& ids, std::size_t max_len = 32);

}  // namespace sentiaug::corpus
