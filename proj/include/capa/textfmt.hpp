#pragma once

// Sectioned "key = value" text used by scenario and experiment files.
//
//   # comment
//   [config]
//   num_groups = 3
//   [group 1]
//   user 1: 0.5 -1.25 20
//
// Keys are separated from values by '=' or ':'.  Values are whitespace
// separated tokens.  Lookups that fail raise ParseError with "origin:line".

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace capa::text {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;

  const Entry* find(std::string_view key) const;
};

class Document {
 public:
  static Document parse(std::string_view content, std::string origin);
  static Document read_file(const std::string& path);

  const std::string& origin() const { return origin_; }
  const std::vector<Section>& sections() const { return sections_; }
  const Section* find(std::string_view name) const;

  [[noreturn]] void fail(int line, std::string_view field, std::string_view what) const;

  double get_double(const Section& s, std::string_view key) const;
  std::int64_t get_int(const Section& s, std::string_view key) const;
  std::string get_string(const Section& s, std::string_view key) const;
  std::vector<double> get_doubles(const Section& s, std::string_view key) const;

  std::vector<double> parse_doubles(const Entry& e) const;
  std::int64_t parse_int(const Entry& e) const;

 private:
  std::string origin_;
  std::vector<Section> sections_;
};

/// Shortest round-trippable form used by every writer (17 significant digits).
std::string format_double(double v, int significant = 17);

}  // namespace capa::text
