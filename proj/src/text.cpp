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

#include "citesum/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <fstream>
#include <sstream>

#include "citesum/error.hpp"
#include "citesum/resources.hpp"

namespace citesum::text {

namespace {

// Calls fn(scalar, byte_offset) for every scalar in `utf8`.
template <typename Fn>
void for_each_scalar(std::string_view utf8, Fn&& fn) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) {
      throw Error(ErrorCode::kMalformedInput,
                  "ill-formed UTF-8 at byte " + std::to_string(start));
    }
    fn(static_cast<char32_t>(c), static_cast<std::size_t>(start));
  }
}

void append_utf8(std::string& out, char32_t c) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
  if (error) {
    throw Error(ErrorCode::kMalformedInput, "not a Unicode scalar value");
  }
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::u32string decode_utf8(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  for_each_scalar(utf8, [&](char32_t c, std::size_t) { out.push_back(c); });
  return out;
}

std::string encode_utf8(std::u32string_view scalars) {
  std::string out;
  out.reserve(scalars.size());
  for (char32_t c : scalars) append_utf8(out, c);
  return out;
}

std::size_t scalar_length(std::string_view utf8) {
  std::size_t n = 0;
  for_each_scalar(utf8, [&](char32_t, std::size_t) { ++n; });
  return n;
}

std::vector<std::size_t> scalar_byte_offsets(std::string_view utf8) {
  std::vector<std::size_t> offsets;
  offsets.reserve(utf8.size() + 1);
  for_each_scalar(utf8,
                  [&](char32_t, std::size_t at) { offsets.push_back(at); });
  offsets.push_back(utf8.size());
  return offsets;
}

std::string slice_scalars(std::string_view utf8, std::size_t start,
                          std::size_t end) {
  const auto offsets = scalar_byte_offsets(utf8);
  if (start > end || end >= offsets.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "scalar range [" + std::to_string(start) + ", " +
                    std::to_string(end) + ") out of bounds");
  }
  return std::string(utf8.substr(offsets[start], offsets[end] - offsets[start]));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for_each_scalar(text, [&](char32_t c, std::size_t) {
    if (u_isalnum(static_cast<UChar32>(c))) {
      append_utf8(current, static_cast<char32_t>(u_tolower(static_cast<UChar32>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  });
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

WordList WordList::parse(std::string_view contents) {
  WordList list;
  std::istringstream in{std::string(contents)};
  std::string line;
  while (std::getline(in, line)) {
    auto entry = trim(line);
    if (entry.empty()) continue;
    if (entry.front() == '#') {
      if (list.version_.empty()) list.version_ = trim(entry.substr(1));
      continue;
    }
    if (list.lookup_.insert(entry).second) list.entries_.push_back(entry);
  }
  return list;
}

WordList WordList::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kStorageFailure,
                "cannot read word list " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const WordList& default_stopwords() {
  static const WordList list = WordList::parse(resources::default_stopwords());
  return list;
}

const WordList& default_abbreviations() {
  static const WordList list =
      WordList::parse(resources::default_abbreviations());
  return list;
}

}  // namespace citesum::text
