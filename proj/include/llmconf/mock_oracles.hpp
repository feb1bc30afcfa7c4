#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>

#include "llmconf/oracles.hpp"

namespace llmconf {

// Deterministic stand-in for the LLM. Prompts found in the answer table get
// the table answer under every decoding mode; other prompts get a short
// pseudo-answer that is a pure function of (prompt digest, mode, seed).
class MockGenerator final : public Generator {
 public:
  MockGenerator() = default;
  explicit MockGenerator(std::map<std::string, std::string> answers);

  GenerationResult generate(std::string_view prompt, const DecodingConfig& config) override;
  std::string endpoint_id() const override { return "mock:generator"; }

 private:
  std::map<std::string, std::string> answers_;
};

// Exact string match entails. Configured contradiction pairs (either order)
// contradict; configured entailment pairs (directional) entail. Everything
// else is neutral. All outputs are one-hot.
class MockNli final : public NliScorer {
 public:
  MockNli() = default;

  void add_contradiction(std::string a, std::string b);
  void add_entailment(std::string premise, std::string hypothesis);
  // Mutual entailment between every pair of members.
  void add_equivalence_class(const std::vector<std::string>& members);

  NliProbs nli(std::string_view premise, std::string_view hypothesis) override;
  std::string endpoint_id() const override { return "mock:nli"; }

 private:
  std::set<std::pair<std::string, std::string>> contradictions_;
  std::set<std::pair<std::string, std::string>> entailments_;
};

// Pseudo back-translation. Leaving English substitutes words from a fixed
// synonym table and then reverses each word's characters; returning to
// English reverses them back. A round trip through any pivot therefore
// yields a deterministic paraphrase of the same length.
class MockTranslator final : public Translator {
 public:
  std::string translate(std::string_view text, std::string_view source_lang,
                        std::string_view target_lang) override;
  std::string endpoint_id() const override { return "mock:translator"; }
};

// A sentence has an entity iff it contains a capitalized word, where the
// sentence's first word only counts if it is not a stopword.
class MockEntityDetector final : public EntityDetector {
 public:
  std::vector<std::size_t> entity_sentence_indices(
      std::span<const std::string> sentences) override;
  std::string endpoint_id() const override { return "mock:ner"; }
};

}  // namespace llmconf
