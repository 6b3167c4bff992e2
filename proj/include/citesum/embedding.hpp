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
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace citesum::embedding {

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool is_zero() const;

  bool operator==(const EmbeddingVector&) const = default;
};

/// Built-in offline embedder: L2-normalized hashed bag of words over the
/// shared tokenizer. Bump the version whenever dim, seed or hash change.
inline constexpr std::size_t kFallbackDim = 256;
inline constexpr std::uint64_t kFallbackSeed = 0x63697465;  // "cite"
inline constexpr std::string_view kFallbackVersion = "hashed-bow-v1";

/// Bucket of `token` in the fallback embedding: FNV-1a 64 over the token's
/// UTF-8 bytes, offset basis xor kFallbackSeed, modulo kFallbackDim.
std::size_t fallback_bucket(std::string_view token);

struct ProviderConfig {
  std::string endpoint = "fallback";  // URL, or "fallback"
  std::string model_name = std::string(kFallbackVersion);
  int batch_size = 32;
  std::chrono::milliseconds timeout{30000};
  std::string api_key_env = "CITESUM_EMBEDDING_API_KEY";
  int max_in_flight = 4;

  bool is_fallback() const { return endpoint == "fallback"; }
  /// Throws Error(kInvalidArgument) when an invariant is violated.
  void validate() const;
};

/// One vector per input text, same order, uniform dimension.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<EmbeddingVector> embed(
      std::span<const std::string> texts) const = 0;
  virtual std::string name() const = 0;

  EmbeddingVector embed_one(const std::string& text) const;
};

class FallbackEmbedder final : public Embedder {
 public:
  std::vector<EmbeddingVector> embed(
      std::span<const std::string> texts) const override;
  std::string name() const override { return std::string(kFallbackVersion); }

  static EmbeddingVector embed_text(std::string_view text);
};

/// Client for the remote wire contract
///   POST {"model": str, "texts": [str]} -> {"vectors": [[float]]}
/// Inputs are split into batches of cfg.batch_size; at most
/// cfg.max_in_flight requests run concurrently across all callers.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(ProviderConfig cfg);
  ~RemoteEmbedder() override;

  std::vector<EmbeddingVector> embed(
      std::span<const std::string> texts) const override;
  std::string name() const override { return cfg_.model_name; }

 private:
  std::vector<EmbeddingVector> embed_batch(
      std::span<const std::string> texts) const;

  ProviderConfig cfg_;
  struct Gate;
  std::unique_ptr<Gate> gate_;
};

/// Memoizes another embedder by exact text. Safe for concurrent use.
class CachingEmbedder final : public Embedder {
 public:
  explicit CachingEmbedder(std::shared_ptr<const Embedder> inner)
      : inner_(std::move(inner)) {}

  std::vector<EmbeddingVector> embed(
      std::span<const std::string> texts) const override;
  std::string name() const override { return inner_->name(); }

  std::size_t cached() const;

 private:
  std::shared_ptr<const Embedder> inner_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, EmbeddingVector> cache_;
};

std::shared_ptr<const Embedder> make_embedder(const ProviderConfig& cfg);

std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts,
                                         const ProviderConfig& cfg);

/// Cosine similarity. Throws Error(kDimensionMismatch) or Error(kZeroVector).
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Like cosine() but a zero vector on either side yields 0. Used wherever a
/// text may have no tokens (ranking contexts, keywords, dense units).
double similarity(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace citesum::embedding
