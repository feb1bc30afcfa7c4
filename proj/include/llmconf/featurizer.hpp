#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "llmconf/oracles.hpp"
#include "llmconf/perturbation.hpp"

namespace llmconf {

inline constexpr std::size_t kFeatureCount = 11;

// Frozen slot layout: two features per prompt strategy, then SRC.
//   0 SD.sets   1 SD.lex   2 PP.sets  3 PP.lex  4 SP.sets  5 SP.lex
//   6 EFA.sets  7 EFA.lex  8 SR.sets  9 SR.lex  10 SRC.maxcontra
const std::array<std::string, kFeatureCount>& feature_names();

// Slot of a strategy's semantic-set feature; the lexical feature follows it.
// SRC maps to slot 10.
std::size_t feature_slot(StrategyKind kind);

// Default value of a slot whose strategy was not applicable.
double neutral_default(std::size_t slot);

struct ResponseSet {
  StrategyKind strategy = StrategyKind::kSD;
  std::vector<std::string> responses;
  std::string question;  // prefixed to responses before NLI; may be empty
};

struct FeatureVector {
  std::string record_id;
  std::array<double, kFeatureCount> values{};
  std::array<bool, kFeatureCount> applicability{};
};

// Number of semantic sets: connected components of the graph whose edges are
// response pairs that entail each other (argmax class) in both directions.
std::size_t count_semantic_sets(const ResponseSet& set, NliScorer& nli);

double lexical_similarity_feature(const ResponseSet& set);

struct SrcFeature {
  double value = 0.0;
  bool applicable = false;
  std::size_t splits_examined = 0;
};

// Highest contradiction probability over (prefix, suffix) splits of the
// response at sentence boundaries, scored in both directions. When there are
// more than max_splits boundaries, max_splits of them are sampled without
// replacement.
SrcFeature src_feature(std::string_view primary_response, NliScorer& nli,
                       std::size_t max_splits = 10, std::uint64_t rng_seed = 0);

// Value(s) one strategy contributes. Prompt strategies carry sets+lex, SRC
// carries only `sets_or_value`.
struct StrategyFeatures {
  double sets_or_value = 0.0;
  double lex = 0.0;
  bool applicable = true;
};

// Throws DataError when a strategy is missing from the map.
FeatureVector assemble(const std::string& record_id,
                       const std::map<StrategyKind, StrategyFeatures>& per_strategy);

}  // namespace llmconf
