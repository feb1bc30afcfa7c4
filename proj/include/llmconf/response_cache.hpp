#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "llmconf/oracles.hpp"

namespace llmconf {

enum class OracleKind { kGenerator, kNli, kTranslator, kNer };

std::string_view to_string(OracleKind kind);

// Identity of one oracle request. Equal requests give equal keys, and keys
// are stable across processes (SHA-256 of the canonical JSON payload).
struct CacheKey {
  OracleKind kind;
  std::string endpoint_id;
  std::string payload_digest;

  static CacheKey make(OracleKind kind, std::string endpoint_id, const nlohmann::json& payload);

  // Digest over all three fields; used as the on-disk file name.
  std::string hex() const;
};

// On-disk key-value store, one JSON file per key under a two-level fan-out
// directory. Writes go to a temp file and are renamed into place, so readers
// never observe a partial value. Identical keys written concurrently resolve
// to last-writer-wins with identical contents.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<nlohmann::json> get(const CacheKey& key) const;
  void put(const CacheKey& key, const nlohmann::json& value) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const CacheKey& key) const;

  std::filesystem::path dir_;
};

// Decorators that consult the cache before the wrapped backend. calls() on a
// decorator counts requests; the backend's own counter counts misses.
class CachingGenerator final : public Generator {
 public:
  CachingGenerator(std::shared_ptr<Generator> inner, std::shared_ptr<const ResponseCache> cache);
  GenerationResult generate(std::string_view prompt, const DecodingConfig& config) override;
  std::string endpoint_id() const override { return inner_->endpoint_id(); }

 private:
  std::shared_ptr<Generator> inner_;
  std::shared_ptr<const ResponseCache> cache_;
};

class CachingNli final : public NliScorer {
 public:
  CachingNli(std::shared_ptr<NliScorer> inner, std::shared_ptr<const ResponseCache> cache);
  NliProbs nli(std::string_view premise, std::string_view hypothesis) override;
  std::string endpoint_id() const override { return inner_->endpoint_id(); }

 private:
  std::shared_ptr<NliScorer> inner_;
  std::shared_ptr<const ResponseCache> cache_;
};

class CachingTranslator final : public Translator {
 public:
  CachingTranslator(std::shared_ptr<Translator> inner, std::shared_ptr<const ResponseCache> cache);
  std::string translate(std::string_view text, std::string_view source_lang,
                        std::string_view target_lang) override;
  std::string endpoint_id() const override { return inner_->endpoint_id(); }

 private:
  std::shared_ptr<Translator> inner_;
  std::shared_ptr<const ResponseCache> cache_;
};

class CachingEntityDetector final : public EntityDetector {
 public:
  CachingEntityDetector(std::shared_ptr<EntityDetector> inner,
                        std::shared_ptr<const ResponseCache> cache);
  std::vector<std::size_t> entity_sentence_indices(
      std::span<const std::string> sentences) override;
  std::string endpoint_id() const override { return inner_->endpoint_id(); }

 private:
  std::shared_ptr<EntityDetector> inner_;
  std::shared_ptr<const ResponseCache> cache_;
};

}  // namespace llmconf
