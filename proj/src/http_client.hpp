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

#include <chrono>
#include <stdexcept>
#include <string>

namespace citesum::detail {

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Raised when no HTTP response was obtained (refused, unreachable, timed out).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// POSTs a JSON body to `url` (http:// or https://). When `api_key_env`
/// names a set environment variable, its value is sent as a bearer token.
HttpResponse post_json(const std::string& url, const std::string& body,
                       std::chrono::milliseconds timeout,
                       const std::string& api_key_env);

}  // namespace citesum::detail
