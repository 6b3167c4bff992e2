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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace citesum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitProvider = 2;  // provider or I/O failure

/// TOML-style configuration: "[section]" headers and "key = value" lines,
/// with '#' comments. Values are quoted strings, numbers or booleans; keys
/// are stored as "section.key".
class Config {
 public:
  /// Throws Error(kMalformedInput) naming the offending line.
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool contains(const std::string& key) const { return values_.contains(key); }

  std::string get_string(const std::string& key, std::string fallback) const;
  /// Throw Error(kMalformedInput) when the stored value has the wrong type.
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Runs one subcommand (argv[0] is the program name). Diagnostics go to
/// `err`; command results meant for the terminal go to `out`.
int run_command(std::span<const std::string> argv, std::ostream& out, std::ostream& err);

/// Writes through a temporary file in the same directory and renames it
/// into place. Throws Error(kStorageFailure).
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace citesum::cli
