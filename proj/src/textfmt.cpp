#include "capa/textfmt.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "capa/errors.hpp"

namespace capa::text {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

const Entry* Section::find(std::string_view key) const {
  for (const auto& e : entries)
    if (e.key == key) return &e;
  return nullptr;
}

Document Document::parse(std::string_view content, std::string origin) {
  Document doc;
  doc.origin_ = std::move(origin);
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    const auto nl = content.find('\n', pos);
    std::string_view line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') doc.fail(line_no, "section", "unterminated section header");
      doc.sections_.push_back({std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
      continue;
    }
    if (doc.sections_.empty()) doc.fail(line_no, "entry", "key/value line before any [section]");
    const auto sep = line.find_first_of("=:");
    if (sep == std::string_view::npos) doc.fail(line_no, line, "expected 'key = value' or 'key: value'");
    const auto key = trim(line.substr(0, sep));
    if (key.empty()) doc.fail(line_no, "entry", "empty key");
    doc.sections_.back().entries.push_back({std::string(key), std::string(trim(line.substr(sep + 1))), line_no});
  }
  return doc;
}

Document Document::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

const Section* Document::find(std::string_view name) const {
  for (const auto& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

void Document::fail(int line, std::string_view field, std::string_view what) const {
  std::ostringstream msg;
  msg << origin_ << ':' << line << ": field '" << field << "': " << what;
  throw ParseError(msg.str());
}

std::vector<double> Document::parse_doubles(const Entry& e) const {
  std::vector<double> out;
  for (const auto& tok : tokens(e.value)) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || errno == ERANGE) fail(e.line, e.key, "expected a number, got '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(e.line, e.key, "missing value");
  return out;
}

std::int64_t Document::parse_int(const Entry& e) const {
  const auto toks = tokens(e.value);
  if (toks.size() != 1) fail(e.line, e.key, "expected a single integer");
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(toks[0].c_str(), &end, 10);
  if (end != toks[0].c_str() + toks[0].size() || errno == ERANGE)
    fail(e.line, e.key, "expected an integer, got '" + toks[0] + "'");
  return v;
}

double Document::get_double(const Section& s, std::string_view key) const {
  const Entry* e = s.find(key);
  if (!e) fail(s.line, key, "missing in [" + s.name + "]");
  const auto v = parse_doubles(*e);
  if (v.size() != 1) fail(e->line, key, "expected a single number");
  return v[0];
}

std::int64_t Document::get_int(const Section& s, std::string_view key) const {
  const Entry* e = s.find(key);
  if (!e) fail(s.line, key, "missing in [" + s.name + "]");
  return parse_int(*e);
}

std::string Document::get_string(const Section& s, std::string_view key) const {
  const Entry* e = s.find(key);
  if (!e) fail(s.line, key, "missing in [" + s.name + "]");
  return e->value;
}

std::vector<double> Document::get_doubles(const Section& s, std::string_view key) const {
  const Entry* e = s.find(key);
  if (!e) fail(s.line, key, "missing in [" + s.name + "]");
  return parse_doubles(*e);
}

std::string format_double(double v, int significant) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant, v);
  return buf;
}

}  // namespace capa::text
