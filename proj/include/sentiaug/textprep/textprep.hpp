#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace sentiaug::text {

using TokenList = std::vector<std::string>;
using Lexicon = std::unordered_set<std::string>;

struct RawRecord {
  std::string label;
  std::string text;
  std::map<std::string, std::string> extra;
};

struct PrepConfig {
  bool lowercase = true;
  bool remove_stopwords = true;
  bool lemmatize = true;
  bool keep_punctuation = true;
  std::optional<std::string> language_filter = std::string("en");
  std::size_t min_tokens = 1;
  std::size_t max_tokens = 512;

  void validate() const;  // throws std::invalid_argument
};

struct LanguageGuess {
  std::string code;
  double confidence = 0.0;
};

TokenList tokenize(std::string_view text);
bool is_word_token(std::string_view token);
std::string to_lower_ascii(std::string_view s);
std::string lemmatize_token(std::string_view token);
std::string join_tokens(const TokenList& tokens);

// One token per line, '#' starts a comment, blank lines ignored.
Lexicon parse_lexicon(std::string_view content);
Lexicon load_lexicon(const std::filesystem::path& path);

const Lexicon& english_stopwords();
// Built-in lexicons: en (the stopword list), es, fr, de.
const std::map<std::string, Lexicon>& builtin_language_lexicons();

LanguageGuess detect_language(std::string_view text, const std::map<std::string, Lexicon>& lexicons);

struct DropCounts {
  std::size_t empty = 0;
  std::size_t language = 0;
  std::size_t too_short = 0;
  std::size_t too_long = 0;
  std::size_t total() const { return empty + language + too_short + too_long; }
};

class Preprocessor {
 public:
  explicit Preprocessor(PrepConfig config = {});
  Preprocessor(PrepConfig config, Lexicon stopwords, std::map<std::string, Lexicon> languages);

  std::optional<TokenList> preprocess(const RawRecord& record);
  std::optional<TokenList> preprocess_text(std::string_view text);

  const PrepConfig& config() const { return config_; }
  const DropCounts& drops() const { return drops_; }
  const Lexicon& stopwords() const { return stopwords_; }

 private:
  PrepConfig config_;
  Lexicon stopwords_;
  std::map<std::string, Lexicon> languages_;
  DropCounts drops_;
};

}  // namespace sentiaug::text
