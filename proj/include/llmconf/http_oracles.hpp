#pragma once

#include <chrono>
#include <functional>
#include <string>

#include <json.hpp>

#include "llmconf/oracles.hpp"

namespace llmconf {

// Connection settings shared by every HTTP oracle client.
struct HttpEndpoint {
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string auth_token;  // sent as "Authorization: Bearer <token>" when set
  std::chrono::milliseconds timeout{60000};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  // Replaceable for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

// POSTs a JSON body and parses a JSON reply. Transport failures and 5xx
// responses are retried with exponential backoff up to max_attempts and then
// raised as TransportError; other non-2xx statuses and unparseable bodies
// raise ProtocolError immediately.
nlohmann::json post_json(const HttpEndpoint& endpoint, const std::string& path,
                         const nlohmann::json& body);

// POST /generate {prompt, mode, top_p?, temperature?, beam_width?, max_tokens, seed}
//   -> {text, finish_reason}
class HttpGenerator final : public Generator {
 public:
  explicit HttpGenerator(HttpEndpoint endpoint);
  GenerationResult generate(std::string_view prompt, const DecodingConfig& config) override;
  std::string endpoint_id() const override;

 private:
  HttpEndpoint endpoint_;
};

// Adapter for chat-completions style services (POST {base}/v1/chat/completions).
// Greedy maps to temperature 0; beam search is requested through the
// use_beam_search/best_of extension fields that some servers accept.
class ChatCompletionsGenerator final : public Generator {
 public:
  ChatCompletionsGenerator(HttpEndpoint endpoint, std::string model);
  GenerationResult generate(std::string_view prompt, const DecodingConfig& config) override;
  std::string endpoint_id() const override;

  static nlohmann::json request_body(std::string_view model, std::string_view prompt,
                                     const DecodingConfig& config);

 private:
  HttpEndpoint endpoint_;
  std::string model_;
};

// POST /nli {premise, hypothesis} -> {entail, neutral, contradict}
class HttpNli final : public NliScorer {
 public:
  explicit HttpNli(HttpEndpoint endpoint);
  NliProbs nli(std::string_view premise, std::string_view hypothesis) override;
  std::string endpoint_id() const override;

 private:
  HttpEndpoint endpoint_;
};

// POST /translate {text, source, target} -> {text}
class HttpTranslator final : public Translator {
 public:
  explicit HttpTranslator(HttpEndpoint endpoint);
  std::string translate(std::string_view text, std::string_view source_lang,
                        std::string_view target_lang) override;
  std::string endpoint_id() const override;

 private:
  HttpEndpoint endpoint_;
};

// POST /ner {sentences} -> {entity_sentence_indices}
class HttpEntityDetector final : public EntityDetector {
 public:
  explicit HttpEntityDetector(HttpEndpoint endpoint);
  std::vector<std::size_t> entity_sentence_indices(
      std::span<const std::string> sentences) override;
  std::string endpoint_id() const override;

 private:
  HttpEndpoint endpoint_;
};

}  // namespace llmconf
