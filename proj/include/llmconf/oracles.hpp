#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace llmconf {

enum class DecodingMode { kGreedy, kBeam, kNucleus };

std::string_view to_string(DecodingMode mode);
DecodingMode decoding_mode_from_string(std::string_view s);

// Decoding request for the black-box generator. Mode-specific fields are set
// exactly when the mode needs them: beam_width for beam search, top_p and
// temperature for nucleus sampling.
struct DecodingConfig {
  DecodingMode mode = DecodingMode::kGreedy;
  std::optional<int> beam_width;
  std::optional<double> top_p;
  std::optional<double> temperature;
  int max_tokens = 64;
  std::uint64_t seed = 0;

  static DecodingConfig greedy(int max_tokens = 64);
  static DecodingConfig beam(int beam_width, int max_tokens = 64);
  static DecodingConfig nucleus(double top_p, double temperature, std::uint64_t seed,
                                int max_tokens = 64);

  // Throws ConfigError when the mode/field invariant does not hold.
  void validate() const;

  // Wire form: {mode, top_p?, temperature?, beam_width?, max_tokens, seed}.
  nlohmann::json to_json() const;
  static DecodingConfig from_json(const nlohmann::json& j);

  bool operator==(const DecodingConfig&) const = default;
};

enum class FinishReason { kStop, kLength, kError };

std::string_view to_string(FinishReason reason);
FinishReason finish_reason_from_string(std::string_view s);

struct GenerationResult {
  std::string text;
  FinishReason finish_reason = FinishReason::kStop;
};

enum class NliLabel { kEntail, kNeutral, kContradict };

struct NliProbs {
  double entail = 0.0;
  double neutral = 1.0;
  double contradict = 0.0;

  // Ties resolve in the order entail, neutral, contradict.
  NliLabel argmax() const;
  // Each in [0,1] and the sum within 1e-6 of 1. Throws ProtocolError.
  void validate() const;
};

// Common base of every external model client. Counts invocations so that
// cache effectiveness and manifest totals can be checked.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::string endpoint_id() const = 0;
  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }

 protected:
  void count_call() { calls_.fetch_add(1, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> calls_{0};
};

// The black-box LLM: prompt in, text out.
class Generator : public Oracle {
 public:
  virtual GenerationResult generate(std::string_view prompt, const DecodingConfig& config) = 0;
};

class NliScorer : public Oracle {
 public:
  virtual NliProbs nli(std::string_view premise, std::string_view hypothesis) = 0;
};

class Translator : public Oracle {
 public:
  virtual std::string translate(std::string_view text, std::string_view source_lang,
                                std::string_view target_lang) = 0;
};

// Named-entity detection at sentence granularity.
class EntityDetector : public Oracle {
 public:
  // Ascending indices of sentences containing at least one named entity.
  virtual std::vector<std::size_t> entity_sentence_indices(
      std::span<const std::string> sentences) = 0;
};

}  // namespace llmconf
