// Copyright 2026 The Citesum Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "citesum/cli.hpp"
#include "citesum/error.hpp"

namespace citesum::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_line(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::kMalformedInput,
              "config line " + std::to_string(line_no) + ": " + why);
}

// Returns the unquoted value; `rest` must start after '='.
std::string parse_value(std::string_view rest, std::size_t line_no) {
  auto s = trim(rest);
  if (s.empty()) bad_line(line_no, "missing value");
  if (s.front() != '"') {
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = trim(std::string_view(s).substr(0, hash));
    if (s.empty()) bad_line(line_no, "missing value");
    return s;
  }
  std::string out;
  std::size_t i = 1;
  for (; i < s.size() && s[i] != '"'; ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) bad_line(line_no, "dangling escape");
    switch (s[i]) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      default: bad_line(line_no, std::string("unknown escape \\") + s[i]);
    }
  }
  if (i == s.size()) bad_line(line_no, "unterminated string");
  const auto tail = trim(std::string_view(s).substr(i + 1));
  if (!tail.empty() && tail.front() != '#') bad_line(line_no, "trailing text after string");
  return out;
}

bool is_key(std::string_view key) {
  if (key.empty()) return false;
  for (char ch : key) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) {
      return false;
    }
  }
  return true;
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string::npos) bad_line(line_no, "unterminated section header");
      section = trim(std::string_view(line).substr(1, close - 1));
      if (!is_key(section)) bad_line(line_no, "bad section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad_line(line_no, "expected key = value");
    const auto key = trim(std::string_view(line).substr(0, eq));
    if (!is_key(key)) bad_line(line_no, "bad key '" + key + "'");
    cfg.values_[section.empty() ? key : section + "." + key] =
        parse_value(std::string_view(line).substr(eq + 1), line_no);
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kStorageFailure, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Config::get_string(const std::string& key, std::string fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long long v = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kMalformedInput, key + " must be an integer, got '" + s + "'");
  }
  return v;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& s = it->second;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw Error(ErrorCode::kMalformedInput, key + " must be a number, got '" + s + "'");
  }
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "on") return true;
  if (it->second == "false" || it->second == "off") return false;
  throw Error(ErrorCode::kMalformedInput, key + " must be true or false, got '" + it->second + "'");
}

}  // namespace citesum::cli
