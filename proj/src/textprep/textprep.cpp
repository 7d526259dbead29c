#include "sentiaug/textprep/textprep.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lexicon_data.hpp"

namespace sentiaug::text {

namespace {

enum class CharClass { space, word, punct };

// Decodes one UTF-8 sequence starting at i; returns its byte length and code point.
// Invalid bytes are consumed one at a time and treated as letters.
std::size_t decode(std::string_view s, std::size_t i, char32_t& cp) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  }
  std::size_t len = (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
  if (len == 0 || i + len > s.size()) {
    cp = 0xFFFD;
    return 1;
  }
  cp = len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b >> 6) != 0x2) {
      cp = 0xFFFD;
      return 1;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  return len;
}

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    const auto c = static_cast<unsigned char>(cp);
    if (std::isspace(c) || std::iscntrl(c)) return CharClass::space;
    if (std::isalnum(c)) return CharClass::word;
    return CharClass::punct;
  }
  if (cp == 0xA0 || cp == 0x2028 || cp == 0x2029 || cp == 0x3000 || (cp >= 0x2000 && cp <= 0x200B)) {
    return CharClass::space;
  }
  if (cp == 0xA1 || cp == 0xAB || cp == 0xBB || cp == 0xBF || (cp >= 0x2010 && cp <= 0x205E) ||
      (cp >= 0x3001 && cp <= 0x3003)) {
    return CharClass::punct;
  }
  return CharClass::word;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y'; }

bool has_vowel(std::string_view s) {
  for (char c : s)
    if (is_vowel(c)) return true;
  return false;
}

// "stopp" -> "stop", but keep "fall", "pass", "buzz", "staff".
std::string undouble(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) &&
      std::isalpha(static_cast<unsigned char>(stem[n - 1])) && stem[n - 1] != 'l' && stem[n - 1] != 's' &&
      stem[n - 1] != 'z' && stem[n - 1] != 'f') {
    stem.pop_back();
  }
  return stem;
}

const Lexicon& lemma_exceptions() {
  static const Lexicon kExceptions = {
      "news",     "series",    "species",  "always",  "perhaps",   "thus",     "yes",
      "lens",     "physics",   "mathematics", "economics", "politics", "statistics", "gas",
      "bias",     "canvas",    "atlas",    "alias",   "everything", "something", "anything",
      "nothing",  "during",    "evening",  "morning", "string",    "spring",   "ceiling",
      "sometimes", "towards",  "afterwards", "besides", "whereas", "various",  "previous",
      "serious",  "ones",      "works",    "is",      "has",       "was",      "does"};
  return kExceptions;
}

std::string lemma_step(const std::string& t) {
  if (lemma_exceptions().count(t)) return t;
  const std::size_t n = t.size();
  if (n >= 5 && (ends_with(t, "ies") || ends_with(t, "ied"))) return t.substr(0, n - 3) + "y";
  if (ends_with(t, "ing")) {
    const std::string stem = t.substr(0, n - 3);
    if (stem.size() >= 3 && has_vowel(stem)) return undouble(stem);
    return t;
  }
  if (ends_with(t, "ed") && !ends_with(t, "eed")) {
    const std::string stem = t.substr(0, n - 2);
    if (stem.size() >= 3 && has_vowel(stem)) return undouble(stem);
    return t;
  }
  if (n >= 4 && ends_with(t, "s") && !ends_with(t, "ss") && !ends_with(t, "us") && !ends_with(t, "is")) {
    return t.substr(0, n - 1);
  }
  return t;
}

}  // namespace

void PrepConfig::validate() const {
  if (max_tokens == 0) throw std::invalid_argument("PrepConfig: max_tokens must be positive");
  if (min_tokens > max_tokens) {
    throw std::invalid_argument("PrepConfig: min_tokens (" + std::to_string(min_tokens) +
                                ") exceeds max_tokens (" + std::to_string(max_tokens) + ")");
  }
}

TokenList tokenize(std::string_view text) {
  TokenList out;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = 0;
    const std::size_t len = decode(text, i, cp);
    const auto cls = classify(cp);
    if (cls == CharClass::word) {
      current.append(text.substr(i, len));
    } else {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      if (cls == CharClass::punct) out.emplace_back(text.substr(i, len));
    }
    i += len;
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

bool is_word_token(std::string_view token) {
  if (token.empty()) return false;
  char32_t cp = 0;
  decode(token, 0, cp);
  return classify(cp) == CharClass::word;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::string lemmatize_token(std::string_view token) {
  std::string current(token);
  while (true) {
    std::string next = lemma_step(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

std::string join_tokens(const TokenList& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Lexicon parse_lexicon(std::string_view content) {
  Lexicon out;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    out.insert(line.substr(b, e - b + 1));
  }
  return out;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lexicon(buf.str());
}

const Lexicon& english_stopwords() {
  static const Lexicon kEnglish = parse_lexicon(data::stopwords_en());
  return kEnglish;
}

const std::map<std::string, Lexicon>& builtin_language_lexicons() {
  static const std::map<std::string, Lexicon> kLexicons = {
      {"de", parse_lexicon(data::lexicon_de())},
      {"en", english_stopwords()},
      {"es", parse_lexicon(data::lexicon_es())},
      {"fr", parse_lexicon(data::lexicon_fr())}};
  return kLexicons;
}

LanguageGuess detect_language(std::string_view text, const std::map<std::string, Lexicon>& lexicons) {
  if (lexicons.empty()) throw std::invalid_argument("detect_language: no lexicons registered");
  std::size_t words = 0;
  std::map<std::string, std::size_t> hits;
  for (const auto& tok : tokenize(text)) {
    if (!is_word_token(tok)) continue;
    ++words;
    const std::string lower = to_lower_ascii(tok);
    for (const auto& [code, lex] : lexicons)
      if (lex.count(lower)) ++hits[code];
  }
  LanguageGuess best{"und", 0.0};
  if (words == 0) return best;
  for (const auto& [code, count] : hits) {
    const double ratio = static_cast<double>(count) / static_cast<double>(words);
    if (ratio > best.confidence) best = {code, ratio};
  }
  return best;
}

Preprocessor::Preprocessor(PrepConfig config)
    : Preprocessor(std::move(config), english_stopwords(), builtin_language_lexicons()) {}

Preprocessor::Preprocessor(PrepConfig config, Lexicon stopwords, std::map<std::string, Lexicon> languages)
    : config_(std::move(config)), stopwords_(std::move(stopwords)), languages_(std::move(languages)) {
  config_.validate();
  if (config_.language_filter && languages_.empty()) {
    throw std::invalid_argument("Preprocessor: language filter set but no language lexicons given");
  }
}

std::optional<TokenList> Preprocessor::preprocess(const RawRecord& record) { return preprocess_text(record.text); }

std::optional<TokenList> Preprocessor::preprocess_text(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    ++drops_.empty;
    return std::nullopt;
  }
  if (config_.language_filter) {
    const auto guess = detect_language(text, languages_).code;
    if (guess != *config_.language_filter && guess != "und") {
      ++drops_.language;
      return std::nullopt;
    }
  }
  TokenList tokens;
  for (auto& tok : tokenize(text)) {
    if (!config_.keep_punctuation && !is_word_token(tok)) continue;
    std::string t = config_.lowercase ? to_lower_ascii(tok) : std::move(tok);
    if (config_.remove_stopwords && stopwords_.count(t)) continue;
    if (config_.lemmatize && is_word_token(t)) {
      std::string lemma = lemmatize_token(t);
      // Keep the surface form when its lemma is itself a stopword.
      if (!(config_.remove_stopwords && stopwords_.count(lemma))) t = std::move(lemma);
    }
    tokens.push_back(std::move(t));
  }
  if (tokens.size() < config_.min_tokens) {
    ++drops_.too_short;
    return std::nullopt;
  }
  if (tokens.size() > config_.max_tokens) {
    ++drops_.too_long;
    return std::nullopt;
  }
  return tokens;
}

}  // namespace sentiaug::text
