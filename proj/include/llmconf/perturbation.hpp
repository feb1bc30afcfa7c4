#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llmconf/oracles.hpp"

namespace llmconf {

// One dataset item.
struct PromptRecord {
  std::string id;
  std::optional<std::string> context;
  std::string question;
  std::vector<std::string> gold_answers;
  std::string template_id;

  // Throws DataError: empty question, no gold answers, or an empty answer.
  void validate() const;
};

enum class StrategyKind { kSD, kPP, kSP, kEFA, kSR, kSRC };

inline constexpr std::array<StrategyKind, 6> kAllStrategies = {
    StrategyKind::kSD, StrategyKind::kPP, StrategyKind::kSP,
    StrategyKind::kEFA, StrategyKind::kSR, StrategyKind::kSRC};

std::string_view to_string(StrategyKind kind);
StrategyKind strategy_from_string(std::string_view s);

struct PromptVariant {
  std::string prompt_text;
  DecodingConfig decoding;
};

// What one elicitation strategy will execute: one generation per variant.
struct PerturbationPlan {
  StrategyKind strategy = StrategyKind::kSD;
  std::vector<PromptVariant> variants;
  int target_generation_count = 0;
  // The perturbation could not alter the prompt; variability comes from
  // nucleus sampling of the unchanged prompt instead.
  bool noop_fallback = false;
  // Only meaningful for SRC: the primary response has at least 2 sentences.
  bool applicable = true;
};

// Decoding parameters used when a plan samples.
struct SamplingDefaults {
  double top_p = 0.95;
  double temperature = 1.0;
  int beam_width = 5;
  int max_tokens = 64;
};

struct PlanOptions {
  int generations = 5;
  std::uint64_t seed = 0;  // per-record seed; substreams are derived per strategy
  SamplingDefaults sampling;
  std::string pivot_language = "fr";
};

// Substitutes {context} and {question}. Any other {identifier} placeholder,
// or {context} on a record without context, is a ConfigError.
std::string render_prompt(const PromptRecord& record, std::string_view template_text);

// The text perturbations operate on: the context when present, else the
// question.
const std::string& perturbation_target(const PromptRecord& record);
PromptRecord with_target(const PromptRecord& record, std::string new_target);

PerturbationPlan plan_sd(const PromptRecord& record, std::string_view template_text,
                         const PlanOptions& options);
PerturbationPlan plan_pp(const PromptRecord& record, std::string_view template_text,
                         Translator& translator, const PlanOptions& options);
PerturbationPlan plan_sp(const PromptRecord& record, std::string_view template_text,
                         EntityDetector& ner, const PlanOptions& options);
PerturbationPlan plan_efa(const PromptRecord& record, std::string_view template_text,
                          EntityDetector& ner, const PlanOptions& options);
PerturbationPlan plan_sr(const PromptRecord& record, std::string_view template_text,
                         const PlanOptions& options);
PerturbationPlan plan_src(std::string_view primary_response);

// Sentence-level building blocks, exposed for the invariant tests.
// Applies a uniformly chosen non-identity permutation to a uniformly chosen
// subset of at most `max_reordered` entity sentences. Requires >= 2 entity
// indices.
std::vector<std::string> permute_entity_sentences(const std::vector<std::string>& sentences,
                                                  const std::vector<std::size_t>& entity_indices,
                                                  std::uint64_t seed,
                                                  std::size_t max_reordered = 5);
// Repeats one uniformly chosen entity sentence so it occurs `copies` times
// consecutively at its original position. Requires a non-empty index list.
std::vector<std::string> amplify_entity_sentence(const std::vector<std::string>& sentences,
                                                 const std::vector<std::size_t>& entity_indices,
                                                 std::uint64_t seed, int copies = 3);

}  // namespace llmconf
