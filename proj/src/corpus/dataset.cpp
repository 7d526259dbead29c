#include "sentiaug/corpus/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace sentiaug::corpus {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) { return text::to_lower_ascii(trim(s)); }

std::vector<std::string> required_columns(Schema schema) {
  switch (schema) {
    case Schema::labeled3: return {"course", "label", "review"};
    case Schema::rated5: return {"rating", "review"};
    case Schema::labeled2: return {"label", "review"};
  }
  return {};
}

bool parse_rating(const std::string& raw, int& out) {
  const std::string s = trim(raw);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return false;
  if (v != std::floor(v)) return false;
  out = static_cast<int>(v);
  return true;
}

}  // namespace

Schema parse_schema(std::string_view name) {
  const std::string n = lower(name);
  if (n == "labeled3") return Schema::labeled3;
  if (n == "rated5") return Schema::rated5;
  if (n == "labeled2") return Schema::labeled2;
  throw std::invalid_argument("unknown schema '" + std::string(name) + "' (expected labeled3, rated5 or labeled2)");
}

std::string schema_name(Schema schema) {
  switch (schema) {
    case Schema::labeled3: return "labeled3";
    case Schema::rated5: return "rated5";
    case Schema::labeled2: return "labeled2";
  }
  return "?";
}

LabelingRule LabelingRule::defaults(Schema schema) {
  LabelingRule r;
  switch (schema) {
    case Schema::labeled3:
      r.labels = {{"positive", kPositive}, {"pos", kPositive}, {"p", kPositive},
                  {"neutral", kNeutral},   {"neu", kNeutral},  {"negative", kNegative},
                  {"neg", kNegative},      {"n", kNegative}};
      break;
    case Schema::rated5:
      r.ratings = {{5, kPositive}, {4, kPositive}, {3, kNeutral}, {2, kNegative}, {1, kNegative}};
      break;
    case Schema::labeled2:
      r.labels = {{"positive", kPositive}, {"pos", kPositive}, {"p", kPositive},
                  {"negative", kNegative}, {"neg", kNegative}, {"n", kNegative}};
      break;
  }
  return r;
}

std::vector<std::string> LabelingRule::categories() const {
  std::set<std::string> seen;
  for (const auto& [_, v] : labels) seen.insert(v);
  for (const auto& [_, v] : ratings) seen.insert(v);
  std::vector<std::string> out;
  for (const auto& c : {kPositive, kNeutral, kNegative}) {
    if (seen.erase(c)) out.push_back(c);
  }
  out.insert(out.end(), seen.begin(), seen.end());
  return out;
}

std::vector<CsvRow> parse_csv(std::istream& in, std::vector<RowError>& errors) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool in_quotes = false, field_started = false, row_has_content = false;
  std::size_t line = 1, quote_line = 0;
  row.line = 1;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    if (row_has_content || !row.fields.empty()) {
      end_field();
      rows.push_back(std::move(row));
    }
    row = CsvRow{};
    field.clear();
    field_started = false;
    row_has_content = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started) {
          in_quotes = true;
          quote_line = line;
          field_started = row_has_content = true;
        } else {
          field.push_back(c);  // stray quote inside an unquoted field: kept literally
        }
        break;
      case ',':
        row_has_content = true;
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') break;
        [[fallthrough]];
      case '\n':
        end_row();
        ++line;
        row.line = line;
        break;
      default:
        field.push_back(c);
        field_started = row_has_content = true;
    }
  }
  if (in_quotes) {
    errors.push_back({quote_line, "unterminated quoted field"});
    return rows;
  }
  end_row();
  return rows;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

LoadResult read_dataset(std::istream& in, Schema schema, const LabelingRule& rule) {
  LoadResult result;
  auto rows = parse_csv(in, result.errors);
  if (rows.empty()) throw DatasetError(schema_name(schema) + ": file has no header row");

  const auto& header = rows.front().fields;
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name = lower(header[i]);
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name = name.substr(3);
    col.emplace(name, i);
  }
  for (const auto& req : required_columns(schema)) {
    if (!col.count(req)) {
      throw DatasetError(schema_name(schema) + ": header lacks required column '" + req + "'");
    }
  }
  const std::size_t review_col = col.at("review");

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size()) {
      result.errors.push_back({row.line, "expected " + std::to_string(header.size()) + " fields, found " +
                                             std::to_string(row.fields.size())});
      continue;
    }
    text::RawRecord rec;
    rec.text = row.fields[review_col];
    if (trim(rec.text).empty()) {
      result.errors.push_back({row.line, "empty review text"});
      continue;
    }
    if (schema == Schema::rated5) {
      int rating = 0;
      const auto& raw = row.fields[col.at("rating")];
      if (!parse_rating(raw, rating)) {
        result.errors.push_back({row.line, "rating '" + raw + "' is not an integer"});
        continue;
      }
      auto it = rule.ratings.find(rating);
      if (it == rule.ratings.end()) {
        result.errors.push_back({row.line, "rating " + std::to_string(rating) + " outside the labeling rule"});
        continue;
      }
      rec.label = it->second;
    } else {
      const auto& raw = row.fields[col.at("label")];
      auto it = rule.labels.find(lower(raw));
      if (it == rule.labels.end()) {
        result.errors.push_back({row.line, "unknown label '" + raw + "'"});
        continue;
      }
      rec.label = it->second;
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i == review_col) continue;
      const std::string name = lower(header[i]);
      if (name == "label") continue;
      rec.extra[name] = row.fields[i];
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

LoadResult load_dataset(const std::filesystem::path& path, Schema schema, const LabelingRule& rule) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  return read_dataset(in, schema, rule);
}

LoadResult load_dataset(const std::filesystem::path& path, Schema schema) {
  return load_dataset(path, schema, LabelingRule::defaults(schema));
}

}  // namespace sentiaug::corpus
