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

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace citesum::text {

/// Identifies the tokenizer behaviour; persisted in index headers so a
/// reader can reject indexes built under different token rules.
inline constexpr std::string_view kTokenizerVersion = "citesum-tok-1";

/// Decodes UTF-8 into Unicode scalar values. Throws Error(kMalformedInput)
/// on ill-formed input.
std::u32string decode_utf8(std::string_view utf8);
std::string encode_utf8(std::u32string_view scalars);

/// Number of Unicode scalar values in `utf8`.
std::size_t scalar_length(std::string_view utf8);

/// Byte offset of every scalar boundary; the result has scalar_length + 1
/// entries, the last one equal to utf8.size().
std::vector<std::size_t> scalar_byte_offsets(std::string_view utf8);

/// utf8[start, end) with offsets counted in scalar values.
std::string slice_scalars(std::string_view utf8, std::size_t start,
                          std::size_t end);

/// Shared tokenizer: maximal runs of Unicode alphanumerics, lowercased.
/// Everything else (punctuation, whitespace, symbols) separates tokens.
std::vector<std::string> tokenize(std::string_view text);

/// A line-oriented word resource. Blank lines and lines starting with '#'
/// are ignored; the first comment line is kept as the version tag.
class WordList {
 public:
  WordList() = default;

  static WordList parse(std::string_view contents);
  static WordList load(const std::filesystem::path& path);

  bool contains(std::string_view word) const {
    return lookup_.contains(std::string(word));
  }
  const std::vector<std::string>& entries() const { return entries_; }
  const std::string& version() const { return version_; }

 private:
  std::vector<std::string> entries_;
  std::unordered_set<std::string> lookup_;
  std::string version_;
};

const WordList& default_stopwords();
const WordList& default_abbreviations();

}  // namespace citesum::text
