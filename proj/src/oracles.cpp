#include "llmconf/oracles.hpp"

#include <cmath>

#include "llmconf/errors.hpp"

namespace llmconf {

std::string_view to_string(DecodingMode mode) {
  switch (mode) {
    case DecodingMode::kGreedy: return "greedy";
    case DecodingMode::kBeam: return "beam";
    case DecodingMode::kNucleus: return "nucleus";
  }
  return "greedy";
}

DecodingMode decoding_mode_from_string(std::string_view s) {
  if (s == "greedy") return DecodingMode::kGreedy;
  if (s == "beam") return DecodingMode::kBeam;
  if (s == "nucleus") return DecodingMode::kNucleus;
  throw ConfigError("unknown decoding mode: " + std::string(s));
}

DecodingConfig DecodingConfig::greedy(int max_tokens) {
  DecodingConfig c;
  c.mode = DecodingMode::kGreedy;
  c.max_tokens = max_tokens;
  return c;
}

DecodingConfig DecodingConfig::beam(int beam_width, int max_tokens) {
  DecodingConfig c;
  c.mode = DecodingMode::kBeam;
  c.beam_width = beam_width;
  c.max_tokens = max_tokens;
  return c;
}

DecodingConfig DecodingConfig::nucleus(double top_p, double temperature, std::uint64_t seed,
                                       int max_tokens) {
  DecodingConfig c;
  c.mode = DecodingMode::kNucleus;
  c.top_p = top_p;
  c.temperature = temperature;
  c.seed = seed;
  c.max_tokens = max_tokens;
  return c;
}

void DecodingConfig::validate() const {
  if (max_tokens <= 0) throw ConfigError("decoding: max_tokens must be positive");
  const bool is_beam = mode == DecodingMode::kBeam;
  const bool is_nucleus = mode == DecodingMode::kNucleus;
  if (beam_width.has_value() != is_beam) {
    throw ConfigError("decoding: beam_width must be set exactly for beam mode");
  }
  if (is_beam && *beam_width <= 0) throw ConfigError("decoding: beam_width must be positive");
  if (top_p.has_value() != is_nucleus || temperature.has_value() != is_nucleus) {
    throw ConfigError("decoding: top_p and temperature must be set exactly for nucleus mode");
  }
  if (is_nucleus) {
    if (!(*top_p > 0.0 && *top_p <= 1.0)) throw ConfigError("decoding: top_p must be in (0,1]");
    if (!(*temperature > 0.0)) throw ConfigError("decoding: temperature must be positive");
  }
}

nlohmann::json DecodingConfig::to_json() const {
  nlohmann::json j;
  j["mode"] = std::string(to_string(mode));
  if (beam_width) j["beam_width"] = *beam_width;
  if (top_p) j["top_p"] = *top_p;
  if (temperature) j["temperature"] = *temperature;
  j["max_tokens"] = max_tokens;
  j["seed"] = seed;
  return j;
}

DecodingConfig DecodingConfig::from_json(const nlohmann::json& j) {
  DecodingConfig c;
  try {
    c.mode = decoding_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("beam_width")) c.beam_width = j.at("beam_width").get<int>();
    if (j.contains("top_p")) c.top_p = j.at("top_p").get<double>();
    if (j.contains("temperature")) c.temperature = j.at("temperature").get<double>();
    if (j.contains("max_tokens")) c.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("decoding config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::kStop: return "stop";
    case FinishReason::kLength: return "length";
    case FinishReason::kError: return "error";
  }
  return "stop";
}

FinishReason finish_reason_from_string(std::string_view s) {
  if (s == "stop") return FinishReason::kStop;
  if (s == "length") return FinishReason::kLength;
  if (s == "error") return FinishReason::kError;
  throw ProtocolError("unknown finish_reason: " + std::string(s));
}

NliLabel NliProbs::argmax() const {
  if (entail >= neutral && entail >= contradict) return NliLabel::kEntail;
  if (neutral >= contradict) return NliLabel::kNeutral;
  return NliLabel::kContradict;
}

void NliProbs::validate() const {
  for (double p : {entail, neutral, contradict}) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ProtocolError("nli: probability outside [0,1]");
    }
  }
  if (std::abs(entail + neutral + contradict - 1.0) > 1e-6) {
    throw ProtocolError("nli: probabilities do not sum to 1");
  }
}

}  // namespace llmconf
