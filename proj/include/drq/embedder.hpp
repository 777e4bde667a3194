#ifndef DRQ_EMBEDDER_HPP
#define DRQ_EMBEDDER_HPP

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "drq/error.hpp"
#include "drq/util.hpp"

namespace drq {

struct EmbeddingVector {
  std::vector<double> values;
  std::string provider_id;

  std::size_t dimension() const { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

struct ProviderInfo {
  std::string provider_id;
  std::size_t dimension = 0;
};

// Source of unit-norm sentence embeddings. Implementations must be safe to
// call from several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual ProviderInfo info() const = 0;
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

// Scales to unit L2 norm; returns the norm before scaling.
inline double normalize_in_place(std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double n = std::sqrt(sq);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
  return n;
}

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.provider_id != b.provider_id || a.values.size() != b.values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "cannot compare " + a.provider_id + "/" +
                                                   std::to_string(a.values.size()) + " with " + b.provider_id + "/" +
                                                   std::to_string(b.values.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  return std::clamp(dot, -1.0, 1.0);
}

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kInvalidArgument, "sha256 failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

// Deterministic, model-free embeddings. Each token maps to a pseudo-random
// vector seeded by its FNV-1a hash; a text is the normalized sum of its
// token vectors plus a half-weight vector seeded by the whole text. Texts
// that share tokens therefore point in similar directions, and identical
// texts map to identical vectors on every platform.
class OfflineProvider final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDimension = 384;
  static constexpr double kWholeTextWeight = 0.5;

  ProviderInfo info() const override { return {"offline-hash-v1", kDimension}; }

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
  }

  EmbeddingVector embed_one(std::string_view text) const {
    if (text.empty()) throw Error(ErrorCode::kEmptyInput, "cannot embed an empty string");
    std::vector<double> acc(kDimension, 0.0);
    for (const auto& tok : tokenize(text)) accumulate(acc, "tok:" + tok, 1.0);
    accumulate(acc, "txt:" + std::string(text), kWholeTextWeight);
    normalize_in_place(acc);
    return {std::move(acc), info().provider_id};
  }

 private:
  static void accumulate(std::vector<double>& acc, const std::string& key, double weight) {
    PortableRng rng(fnv1a64(key));
    for (double& x : acc) x += weight * rng.symmetric_unit();
  }
};

// Content-addressed, append-only embedding store. An empty path keeps it in
// memory only. Lines are JSON {"p": provider_id, "h": sha256(text), "v": [...]};
// doubles are written with round-trip precision so cached vectors are
// bit-identical to freshly computed ones.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::string path = {}) : path_(std::move(path)) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        entries_[key(j.at("p").get<std::string>(), j.at("h").get<std::string>())] =
            j.at("v").get<std::vector<double>>();
      } catch (const nlohmann::json::exception&) {
        // torn trailing write; the entry is simply recomputed
      }
    }
  }

  std::optional<std::vector<double>> get(const std::string& provider_id, std::string_view text) const {
    const std::string k = key(provider_id, sha256_hex(text));
    std::shared_lock lock(mutex_);
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& provider_id, std::string_view text, const std::vector<double>& values) {
    const std::string hash = sha256_hex(text);
    std::unique_lock lock(mutex_);
    if (!entries_.emplace(key(provider_id, hash), values).second) return;
    if (path_.empty()) return;
    const nlohmann::json line = {{"p", provider_id}, {"h", hash}, {"v", values}};
    std::ofstream out(path_, std::ios::app);
    out << line.dump() << '\n';
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

 private:
  static std::string key(const std::string& provider_id, const std::string& hash) { return provider_id + '\t' + hash; }

  std::string path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

// Decorator that serves repeated texts from an EmbeddingCache.
class CachedProvider final : public EmbeddingProvider {
 public:
  CachedProvider(EmbeddingProvider& inner, EmbeddingCache& cache) : inner_(inner), cache_(cache), info_(inner.info()) {}

  ProviderInfo info() const override { return info_; }

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::string> misses;
    std::unordered_map<std::string, std::size_t> miss_index;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (auto hit = cache_.get(info_.provider_id, texts[i])) {
        out[i] = {std::move(*hit), info_.provider_id};
      } else if (miss_index.emplace(texts[i], misses.size()).second) {
        misses.push_back(texts[i]);
      }
    }
    if (!misses.empty()) {
      auto fresh = inner_.embed(misses);
      for (std::size_t m = 0; m < misses.size(); ++m) cache_.put(info_.provider_id, misses[m], fresh[m].values);
      for (std::size_t i = 0; i < texts.size(); ++i) {
        if (out[i].values.empty()) out[i] = fresh[miss_index.at(texts[i])];
      }
    }
    return out;
  }

 private:
  EmbeddingProvider& inner_;
  EmbeddingCache& cache_;
  ProviderInfo info_;
};

}  // namespace drq

#endif  // DRQ_EMBEDDER_HPP
