#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "llmconf/featurizer.hpp"

namespace llmconf {

struct LabelConfig {
  std::string metric = "rouge-l-f1";
  double theta = 0.3;

  void validate() const;  // ConfigError unless theta in [0,1] and metric known
};

struct LabelResult {
  int label = 0;
  double match_score = 0.0;
};

// match_score is the best ROUGE-L F1 of the response against any gold answer;
// the label is 1 iff match_score >= theta.
LabelResult label(std::string_view primary_response, std::span<const std::string> gold_answers,
                  const LabelConfig& config = {});

// Diagnostics carried alongside each feature row.
struct Provenance {
  std::array<bool, kAllStrategies.size()> noop_fallback{};
  std::array<int, kAllStrategies.size()> generations{};
  std::string primary_response;
};

struct LabeledExample {
  FeatureVector features;
  int label = 0;
  double match_score = 0.0;
  Provenance provenance;

  const std::string& record_id() const { return features.record_id; }
};

// One JSONL row: record_id, features (name -> value), values[11],
// applicable[11], label, match_score, noop, generations, primary_response.
nlohmann::json to_json(const LabeledExample& example);
LabeledExample labeled_example_from_json(const nlohmann::json& j);

void write_jsonl(const std::filesystem::path& path, std::span<const LabeledExample> examples);
std::vector<LabeledExample> read_jsonl(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, std::span<const LabeledExample> examples);

}  // namespace llmconf
