#include "llmconf/http_oracles.hpp"

#include <httplib.h>

#include <thread>

#include "llmconf/errors.hpp"
#include "llmconf/text.hpp"

namespace llmconf {
namespace {

struct SplitUrl {
  std::string scheme_host_port;
  std::string prefix;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

void require_non_empty(std::string_view s, const char* what) {
  if (text::trim(s).empty()) throw DataError(std::string(what) + " must be non-empty");
}

template <typename T>
T field(const nlohmann::json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("response field '") + name + "': " + e.what());
  }
}

}  // namespace

nlohmann::json post_json(const HttpEndpoint& endpoint, const std::string& path,
                         const nlohmann::json& body) {
  const SplitUrl url = split_url(endpoint.base_url);
  const std::string full_path = url.prefix + path;
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!endpoint.auth_token.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.auth_token);
  }

  auto backoff = endpoint.initial_backoff;
  std::string last_error;
  const int attempts = std::max(1, endpoint.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(url.scheme_host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    auto res = client.Post(full_path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
    } else if (res->status < 200 || res->status >= 300) {
      throw ProtocolError(endpoint.base_url + full_path + ": HTTP " + std::to_string(res->status) +
                          ": " + res->body);
    } else {
      auto parsed = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
      if (parsed.is_discarded() || !parsed.is_object()) {
        throw ProtocolError(endpoint.base_url + full_path + ": malformed JSON response");
      }
      return parsed;
    }
    if (attempt < attempts) {
      if (endpoint.sleep) {
        endpoint.sleep(backoff);
      } else {
        std::this_thread::sleep_for(backoff);
      }
      backoff *= 2;
    }
  }
  throw TransportError(endpoint.base_url + full_path + ": giving up after " +
                       std::to_string(attempts) + " attempts (" + last_error + ")");
}

HttpGenerator::HttpGenerator(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpGenerator::endpoint_id() const { return "http:" + endpoint_.base_url + "/generate"; }

GenerationResult HttpGenerator::generate(std::string_view prompt, const DecodingConfig& config) {
  count_call();
  require_non_empty(prompt, "generate: prompt");
  config.validate();
  nlohmann::json body = config.to_json();
  body["prompt"] = std::string(prompt);
  const auto reply = post_json(endpoint_, "/generate", body);
  return {field<std::string>(reply, "text"),
          finish_reason_from_string(field<std::string>(reply, "finish_reason"))};
}

ChatCompletionsGenerator::ChatCompletionsGenerator(HttpEndpoint endpoint, std::string model)
    : endpoint_(std::move(endpoint)), model_(std::move(model)) {}

std::string ChatCompletionsGenerator::endpoint_id() const {
  return "chat:" + endpoint_.base_url + "#" + model_;
}

nlohmann::json ChatCompletionsGenerator::request_body(std::string_view model,
                                                      std::string_view prompt,
                                                      const DecodingConfig& config) {
  nlohmann::json body = {
      {"model", std::string(model)},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"max_tokens", config.max_tokens},
      {"n", 1},
      {"seed", config.seed},
  };
  switch (config.mode) {
    case DecodingMode::kGreedy:
      body["temperature"] = 0.0;
      break;
    case DecodingMode::kBeam:
      body["temperature"] = 0.0;
      body["use_beam_search"] = true;
      body["best_of"] = *config.beam_width;
      break;
    case DecodingMode::kNucleus:
      body["temperature"] = *config.temperature;
      body["top_p"] = *config.top_p;
      break;
  }
  return body;
}

GenerationResult ChatCompletionsGenerator::generate(std::string_view prompt,
                                                    const DecodingConfig& config) {
  count_call();
  require_non_empty(prompt, "generate: prompt");
  config.validate();
  const auto reply = post_json(endpoint_, "/v1/chat/completions", request_body(model_, prompt, config));
  try {
    const auto& choice = reply.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    GenerationResult r;
    r.text = content.is_null() ? std::string{} : content.get<std::string>();
    const std::string reason =
        choice.contains("finish_reason") && choice["finish_reason"].is_string()
            ? choice["finish_reason"].get<std::string>()
            : "stop";
    r.finish_reason = reason == "length" ? FinishReason::kLength : FinishReason::kStop;
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("chat completion response: ") + e.what());
  }
}

HttpNli::HttpNli(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpNli::endpoint_id() const { return "http:" + endpoint_.base_url + "/nli"; }

NliProbs HttpNli::nli(std::string_view premise, std::string_view hypothesis) {
  count_call();
  require_non_empty(premise, "nli: premise");
  require_non_empty(hypothesis, "nli: hypothesis");
  const auto reply = post_json(endpoint_, "/nli",
                               {{"premise", std::string(premise)},
                                {"hypothesis", std::string(hypothesis)}});
  NliProbs p{field<double>(reply, "entail"), field<double>(reply, "neutral"),
             field<double>(reply, "contradict")};
  p.validate();
  return p;
}

HttpTranslator::HttpTranslator(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpTranslator::endpoint_id() const {
  return "http:" + endpoint_.base_url + "/translate";
}

std::string HttpTranslator::translate(std::string_view text, std::string_view source_lang,
                                      std::string_view target_lang) {
  count_call();
  require_non_empty(text, "translate: text");
  const auto reply = post_json(endpoint_, "/translate",
                               {{"text", std::string(text)},
                                {"source", std::string(source_lang)},
                                {"target", std::string(target_lang)}});
  return field<std::string>(reply, "text");
}

HttpEntityDetector::HttpEntityDetector(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpEntityDetector::endpoint_id() const { return "http:" + endpoint_.base_url + "/ner"; }

std::vector<std::size_t> HttpEntityDetector::entity_sentence_indices(
    std::span<const std::string> sentences) {
  count_call();
  if (sentences.empty()) return {};
  const auto reply = post_json(
      endpoint_, "/ner",
      {{"sentences", std::vector<std::string>(sentences.begin(), sentences.end())}});
  auto indices = field<std::vector<std::size_t>>(reply, "entity_sentence_indices");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= sentences.size() || (i > 0 && indices[i] <= indices[i - 1])) {
      throw ProtocolError("ner: indices must be strictly ascending and in range");
    }
  }
  return indices;
}

}  // namespace llmconf
