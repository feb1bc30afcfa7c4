#include "llmconf/response_cache.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "llmconf/digest.hpp"
#include "llmconf/errors.hpp"

namespace llmconf {
namespace fs = std::filesystem;

std::string_view to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::kGenerator: return "generator";
    case OracleKind::kNli: return "nli";
    case OracleKind::kTranslator: return "translator";
    case OracleKind::kNer: return "ner";
  }
  return "generator";
}

CacheKey CacheKey::make(OracleKind kind, std::string endpoint_id, const nlohmann::json& payload) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  return CacheKey{kind, std::move(endpoint_id), sha256_hex(payload.dump())};
}

std::string CacheKey::hex() const {
  nlohmann::json j = {{"kind", std::string(to_string(kind))},
                      {"endpoint", endpoint_id},
                      {"payload", payload_digest}};
  return sha256_hex(j.dump());
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw ConfigError("cache: cannot create " + dir_.string() + ": " + ec.message());
}

fs::path ResponseCache::path_for(const CacheKey& key) const {
  const std::string h = key.hex();
  return dir_ / h.substr(0, 2) / (h + ".json");
}

std::optional<nlohmann::json> ResponseCache::get(const CacheKey& key) const {
  const fs::path p = path_for(key);
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  auto parsed = nlohmann::json::parse(ss.str(), nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.contains("value")) return std::nullopt;
  return parsed.at("value");
}

void ResponseCache::put(const CacheKey& key, const nlohmann::json& value) const {
  static std::atomic<std::uint64_t> counter{0};
  const fs::path p = path_for(key);
  fs::create_directories(p.parent_path());
  std::ostringstream tmp_name;
  tmp_name << p.filename().string() << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id())
           << "." << counter.fetch_add(1);
  const fs::path tmp = p.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cache: cannot write " + tmp.string());
    nlohmann::json record = {{"kind", std::string(to_string(key.kind))},
                             {"endpoint", key.endpoint_id},
                             {"value", value}};
    out << record.dump() << '\n';
  }
  fs::rename(tmp, p);
}

CachingGenerator::CachingGenerator(std::shared_ptr<Generator> inner,
                                   std::shared_ptr<const ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

GenerationResult CachingGenerator::generate(std::string_view prompt, const DecodingConfig& config) {
  count_call();
  nlohmann::json payload = config.to_json();
  payload["prompt"] = std::string(prompt);
  const CacheKey key = CacheKey::make(OracleKind::kGenerator, inner_->endpoint_id(), payload);
  if (auto hit = cache_->get(key)) {
    return {hit->at("text").get<std::string>(),
            finish_reason_from_string(hit->at("finish_reason").get<std::string>())};
  }
  GenerationResult r = inner_->generate(prompt, config);
  // Failed generations are not persisted so a later run can retry them.
  if (r.finish_reason != FinishReason::kError) {
    cache_->put(key, {{"text", r.text}, {"finish_reason", std::string(to_string(r.finish_reason))}});
  }
  return r;
}

CachingNli::CachingNli(std::shared_ptr<NliScorer> inner, std::shared_ptr<const ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

NliProbs CachingNli::nli(std::string_view premise, std::string_view hypothesis) {
  count_call();
  const nlohmann::json payload = {{"premise", std::string(premise)},
                                  {"hypothesis", std::string(hypothesis)}};
  const CacheKey key = CacheKey::make(OracleKind::kNli, inner_->endpoint_id(), payload);
  if (auto hit = cache_->get(key)) {
    return {hit->at("entail").get<double>(), hit->at("neutral").get<double>(),
            hit->at("contradict").get<double>()};
  }
  const NliProbs p = inner_->nli(premise, hypothesis);
  cache_->put(key, {{"entail", p.entail}, {"neutral", p.neutral}, {"contradict", p.contradict}});
  return p;
}

CachingTranslator::CachingTranslator(std::shared_ptr<Translator> inner,
                                     std::shared_ptr<const ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::string CachingTranslator::translate(std::string_view text, std::string_view source_lang,
                                         std::string_view target_lang) {
  count_call();
  const nlohmann::json payload = {{"text", std::string(text)},
                                  {"source", std::string(source_lang)},
                                  {"target", std::string(target_lang)}};
  const CacheKey key = CacheKey::make(OracleKind::kTranslator, inner_->endpoint_id(), payload);
  if (auto hit = cache_->get(key)) return hit->at("text").get<std::string>();
  std::string out = inner_->translate(text, source_lang, target_lang);
  cache_->put(key, {{"text", out}});
  return out;
}

CachingEntityDetector::CachingEntityDetector(std::shared_ptr<EntityDetector> inner,
                                             std::shared_ptr<const ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::vector<std::size_t> CachingEntityDetector::entity_sentence_indices(
    std::span<const std::string> sentences) {
  count_call();
  const nlohmann::json payload = {
      {"sentences", std::vector<std::string>(sentences.begin(), sentences.end())}};
  const CacheKey key = CacheKey::make(OracleKind::kNer, inner_->endpoint_id(), payload);
  if (auto hit = cache_->get(key)) {
    return hit->at("entity_sentence_indices").get<std::vector<std::size_t>>();
  }
  auto out = inner_->entity_sentence_indices(sentences);
  cache_->put(key, {{"entity_sentence_indices", out}});
  return out;
}

}  // namespace llmconf
