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

#include "citesum/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <semaphore>

#include "citesum/error.hpp"
#include "citesum/text.hpp"
#include "http_client.hpp"

namespace citesum::embedding {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;
constexpr std::ptrdiff_t kMaxInFlight = 256;

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    sum += a.values[i] * b.values[i];
  }
  return sum;
}

}  // namespace

bool EmbeddingVector::is_zero() const {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return v == 0.0; });
}

std::size_t fallback_bucket(std::string_view token) {
  std::uint64_t h = kFnvOffset ^ kFallbackSeed;
  for (unsigned char byte : token) {
    h ^= byte;
    h *= kFnvPrime;
  }
  return static_cast<std::size_t>(h % kFallbackDim);
}

void ProviderConfig::validate() const {
  if (batch_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "embedding batch_size must be >= 1");
  }
  if (timeout.count() <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "embedding timeout must be > 0");
  }
  if (max_in_flight < 1 || max_in_flight > kMaxInFlight) {
    throw Error(ErrorCode::kInvalidArgument,
                "embedding max_in_flight must be in [1, 256]");
  }
}

EmbeddingVector Embedder::embed_one(const std::string& text) const {
  auto out = embed(std::span<const std::string>(&text, 1));
  return std::move(out.front());
}

EmbeddingVector FallbackEmbedder::embed_text(std::string_view text) {
  EmbeddingVector v;
  v.values.assign(kFallbackDim, 0.0);
  for (const auto& token : text::tokenize(text)) {
    v.values[fallback_bucket(token)] += 1.0;
  }
  const double norm = std::sqrt(dot(v, v));
  if (norm > 0.0) {
    for (auto& x : v.values) x /= norm;
  }
  return v;
}

std::vector<EmbeddingVector> FallbackEmbedder::embed(
    std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_text(t));
  return out;
}

struct RemoteEmbedder::Gate {
  explicit Gate(int slots) : sem(slots) {}
  std::counting_semaphore<kMaxInFlight> sem;
};

RemoteEmbedder::RemoteEmbedder(ProviderConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  gate_ = std::make_unique<Gate>(cfg_.max_in_flight);
}

RemoteEmbedder::~RemoteEmbedder() = default;

std::vector<EmbeddingVector> RemoteEmbedder::embed(
    std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  const auto batch = static_cast<std::size_t>(cfg_.batch_size);
  for (std::size_t i = 0; i < texts.size(); i += batch) {
    auto part = embed_batch(texts.subspan(i, std::min(batch, texts.size() - i)));
    for (auto& v : part) out.push_back(std::move(v));
  }
  for (const auto& v : out) {
    if (v.dim() != out.front().dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "embedding provider returned vectors of differing dimension");
    }
  }
  return out;
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(
    std::span<const std::string> texts) const {
  nlohmann::json request{{"model", cfg_.model_name},
                         {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  detail::HttpResponse response;
  gate_->sem.acquire();
  try {
    response = detail::post_json(cfg_.endpoint, request.dump(), cfg_.timeout,
                                 cfg_.api_key_env);
  } catch (const detail::TransportError& e) {
    gate_->sem.release();
    throw Error(ErrorCode::kEmbeddingUnavailable, e.what());
  }
  gate_->sem.release();

  if (response.status != 200) {
    throw Error(ErrorCode::kEmbeddingUnavailable,
                "embedding provider answered HTTP " + std::to_string(response.status));
  }
  std::vector<EmbeddingVector> out;
  try {
    const auto body = nlohmann::json::parse(response.body);
    for (const auto& row : body.at("vectors")) {
      EmbeddingVector v;
      v.values = row.get<std::vector<double>>();
      out.push_back(std::move(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kEmbeddingUnavailable,
                std::string("malformed embedding response: ") + e.what());
  }
  if (out.size() != texts.size()) {
    throw Error(ErrorCode::kEmbeddingUnavailable,
                "embedding provider returned " + std::to_string(out.size()) +
                    " vectors for " + std::to_string(texts.size()) + " texts");
  }
  for (const auto& v : out) {
    if (v.dim() == 0 || v.dim() != out.front().dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "embedding provider returned vectors of differing dimension");
    }
    if (!std::all_of(v.values.begin(), v.values.end(),
                     [](double x) { return std::isfinite(x); })) {
      throw Error(ErrorCode::kEmbeddingUnavailable,
                  "embedding provider returned non-finite values");
    }
  }
  return out;
}

std::vector<EmbeddingVector> CachingEmbedder::embed(
    std::span<const std::string> texts) const {
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mu_);
    for (const auto& t : texts) {
      if (!cache_.contains(t) &&
          std::find(missing.begin(), missing.end(), t) == missing.end()) {
        missing.push_back(t);
      }
    }
  }
  if (!missing.empty()) {
    auto fresh = inner_->embed(missing);
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      cache_.try_emplace(missing[i], std::move(fresh[i]));
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  std::lock_guard lock(mu_);
  for (const auto& t : texts) out.push_back(cache_.at(t));
  return out;
}

std::size_t CachingEmbedder::cached() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

std::shared_ptr<const Embedder> make_embedder(const ProviderConfig& cfg) {
  cfg.validate();
  if (cfg.is_fallback()) return std::make_shared<FallbackEmbedder>();
  return std::make_shared<RemoteEmbedder>(cfg);
}

std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts,
                                         const ProviderConfig& cfg) {
  if (texts.empty()) return {};
  return make_embedder(cfg)->embed(texts);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine of vectors with dimensions " + std::to_string(a.dim()) +
                    " and " + std::to_string(b.dim()));
  }
  const double na = dot(a, a);
  const double nb = dot(b, b);
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  }
  const double c = dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

double similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.is_zero() || b.is_zero()) {
    if (a.dim() != b.dim()) return cosine(a, b);  // throws kDimensionMismatch
    return 0.0;
  }
  return cosine(a, b);
}

}  // namespace citesum::embedding
