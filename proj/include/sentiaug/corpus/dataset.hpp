#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sentiaug/textprep/textprep.hpp"

namespace sentiaug::corpus {

enum class Schema { labeled3, rated5, labeled2 };

Schema parse_schema(std::string_view name);
std::string schema_name(Schema schema);

inline const std::string kPositive = "positive";
inline const std::string kNeutral = "neutral";
inline const std::string kNegative = "negative";

// Maps raw label strings (lowercased) or integer ratings to category names.
struct LabelingRule {
  std::map<std::string, std::string> labels;
  std::map<int, std::string> ratings;

  static LabelingRule defaults(Schema schema);
  // Category names this rule can emit, in canonical order (positive, neutral, negative).
  std::vector<std::string> categories() const;
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct LoadResult {
  std::vector<text::RawRecord> records;
  std::vector<RowError> errors;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvRow {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

// RFC 4180: quoted fields may hold commas, doubled quotes and newlines; CRLF or LF endings.
// Unterminated quotes are reported in `errors` and end parsing.
std::vector<CsvRow> parse_csv(std::istream& in, std::vector<RowError>& errors);
std::string csv_escape(std::string_view field);

LoadResult read_dataset(std::istream& in, Schema schema, const LabelingRule& rule);
LoadResult load_dataset(const std::filesystem::path& path, Schema schema, const LabelingRule& rule);
LoadResult load_dataset(const std::filesystem::path& path, Schema schema);

}  // namespace sentiaug::corpus
