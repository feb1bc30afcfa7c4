#include "llmconf/featurizer.hpp"

#include <algorithm>

#include "llmconf/errors.hpp"
#include "llmconf/random.hpp"
#include "llmconf/text.hpp"
#include "llmconf/union_find.hpp"

namespace llmconf {
namespace {

std::string with_question(const std::string& question, const std::string& response) {
  if (question.empty()) return response;
  return question + " " + response;
}

}  // namespace

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "SD.sets", "SD.lex", "PP.sets", "PP.lex", "SP.sets", "SP.lex",
      "EFA.sets", "EFA.lex", "SR.sets", "SR.lex", "SRC.maxcontra"};
  return names;
}

std::size_t feature_slot(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kSD: return 0;
    case StrategyKind::kPP: return 2;
    case StrategyKind::kSP: return 4;
    case StrategyKind::kEFA: return 6;
    case StrategyKind::kSR: return 8;
    case StrategyKind::kSRC: return 10;
  }
  return 0;
}

double neutral_default(std::size_t slot) {
  // A disabled prompt strategy reads as "one set, identical responses";
  // SRC reads as "no evidence of contradiction".
  return slot == 10 ? 0.0 : 1.0;
}

std::size_t count_semantic_sets(const ResponseSet& set, NliScorer& nli) {
  const auto& r = set.responses;
  if (r.size() < 2) {
    throw InapplicableFeature("count_semantic_sets: need at least 2 responses");
  }
  std::vector<std::string> inputs;
  inputs.reserve(r.size());
  for (const auto& resp : r) inputs.push_back(with_question(set.question, resp));

  UnionFind uf(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = i + 1; j < r.size(); ++j) {
      // Already in one component: the edge cannot change the count.
      if (uf.connected(i, j)) continue;
      if (inputs[i] == inputs[j]) {
        uf.unite(i, j);
        continue;
      }
      if (nli.nli(inputs[i], inputs[j]).argmax() != NliLabel::kEntail) continue;
      if (nli.nli(inputs[j], inputs[i]).argmax() != NliLabel::kEntail) continue;
      uf.unite(i, j);
    }
  }
  return uf.components();
}

double lexical_similarity_feature(const ResponseSet& set) {
  return text::mean_pairwise_rouge(set.responses);
}

SrcFeature src_feature(std::string_view primary_response, NliScorer& nli, std::size_t max_splits,
                       std::uint64_t rng_seed) {
  const auto sentences = text::split_sentences(primary_response);
  SrcFeature out;
  if (sentences.size() < 2) return out;
  out.applicable = true;

  const std::size_t boundaries = sentences.size() - 1;
  std::vector<std::size_t> cuts;  // cut k puts sentences [0, k] in the prefix
  if (boundaries <= max_splits) {
    for (std::size_t k = 0; k < boundaries; ++k) cuts.push_back(k);
  } else {
    Rng rng(rng_seed);
    cuts = rng.sample_without_replacement(boundaries, max_splits);
    std::sort(cuts.begin(), cuts.end());
  }

  for (std::size_t k : cuts) {
    const std::span<const std::string> all(sentences);
    const std::string prefix = text::join_sentences(all.subspan(0, k + 1));
    const std::string suffix = text::join_sentences(all.subspan(k + 1));
    const double forward = nli.nli(prefix, suffix).contradict;
    const double backward = nli.nli(suffix, prefix).contradict;
    out.value = std::max({out.value, forward, backward});
    ++out.splits_examined;
  }
  return out;
}

FeatureVector assemble(const std::string& record_id,
                       const std::map<StrategyKind, StrategyFeatures>& per_strategy) {
  FeatureVector fv;
  fv.record_id = record_id;
  for (StrategyKind kind : kAllStrategies) {
    const auto it = per_strategy.find(kind);
    if (it == per_strategy.end()) {
      throw DataError("assemble: record " + record_id + " missing strategy " +
                      std::string(to_string(kind)));
    }
    const StrategyFeatures& f = it->second;
    const std::size_t slot = feature_slot(kind);
    if (kind == StrategyKind::kSRC) {
      fv.values[slot] = f.applicable ? f.sets_or_value : neutral_default(slot);
      fv.applicability[slot] = f.applicable;
    } else {
      fv.values[slot] = f.applicable ? f.sets_or_value : neutral_default(slot);
      fv.values[slot + 1] = f.applicable ? f.lex : neutral_default(slot + 1);
      fv.applicability[slot] = f.applicable;
      fv.applicability[slot + 1] = f.applicable;
    }
  }
  return fv;
}

}  // namespace llmconf
