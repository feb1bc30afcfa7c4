#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "llmconf/oracles.hpp"
#include "llmconf/perturbation.hpp"

namespace llmconf {

struct SyntheticLlmConfig {
  double base_accuracy = 0.7;  // fraction of records the model "knows"
  double noise = 0.1;          // per-prompt chance that variability disagrees with knowledge
  std::uint64_t seed = 1;
  std::string name = "synthetic";
};

// A mock LLM whose response variability is causally tied to correctness.
//
// Each record is known with probability base_accuracy. The greedy answer to
// the unperturbed prompt is the gold answer when known and a fixed wrong
// answer otherwise. Every other (prompt, decoding) request is consistent
// (repeats that primary answer) or diverse (draws from a pool of candidate
// answers): known records are consistent and unknown ones diverse, except
// that each distinct prompt flips this behaviour with probability `noise`.
// Outputs are pure functions of (seed, record, prompt, decoding).
class SyntheticLlm final : public Generator {
 public:
  SyntheticLlm(SyntheticLlmConfig config, const std::vector<PromptRecord>& records,
               std::string template_text);

  GenerationResult generate(std::string_view prompt, const DecodingConfig& config) override;
  std::string endpoint_id() const override;

  bool knows(const PromptRecord& record) const;

 private:
  std::optional<std::size_t> find_record(std::string_view prompt) const;

  SyntheticLlmConfig config_;
  std::vector<PromptRecord> records_;
  std::string template_text_;
  std::unordered_map<std::string, std::size_t> by_prompt_;
  std::unordered_map<std::string, std::size_t> by_question_;
  std::string before_question_;
  std::string after_question_;
};

// Records with multi-sentence, entity-rich contexts and one-word gold
// answers, deterministic in (n, seed).
std::vector<PromptRecord> make_synthetic_dataset(std::size_t n, std::uint64_t seed,
                                                 const std::string& template_id = "synthetic");

// Template the synthetic dataset is rendered with.
inline constexpr std::string_view kSyntheticTemplate =
    "Provide an answer in less than 5 words for the following question based on the context "
    "below:\ncontext: {context}\nQuestion: {question}\nAnswer:";

}  // namespace llmconf
