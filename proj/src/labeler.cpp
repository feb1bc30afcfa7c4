#include "llmconf/labeler.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "llmconf/errors.hpp"
#include "llmconf/text.hpp"

namespace llmconf {

void LabelConfig::validate() const {
  if (metric != "rouge-l-f1") throw ConfigError("label metric must be rouge-l-f1, got " + metric);
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("label theta must be in [0,1]");
}

LabelResult label(std::string_view primary_response, std::span<const std::string> gold_answers,
                  const LabelConfig& config) {
  config.validate();
  if (gold_answers.empty()) throw DataError("label: empty gold answer list");
  const text::TokenSequence response = text::tokenize(primary_response);
  LabelResult out;
  for (const auto& gold : gold_answers) {
    const text::TokenSequence g = text::tokenize(gold);
    out.match_score = std::max(out.match_score, text::rouge_l_f1(response, g));
  }
  out.label = out.match_score >= config.theta ? 1 : 0;
  return out;
}

nlohmann::json to_json(const LabeledExample& e) {
  nlohmann::json j;
  j["record_id"] = e.record_id();
  j["values"] = e.features.values;
  j["applicable"] = e.features.applicability;
  j["label"] = e.label;
  j["match_score"] = e.match_score;
  nlohmann::json noop = nlohmann::json::object();
  nlohmann::json gens = nlohmann::json::object();
  for (std::size_t s = 0; s < kAllStrategies.size(); ++s) {
    noop[std::string(to_string(kAllStrategies[s]))] = e.provenance.noop_fallback[s];
    gens[std::string(to_string(kAllStrategies[s]))] = e.provenance.generations[s];
  }
  j["noop_fallback"] = noop;
  j["generations"] = gens;
  j["primary_response"] = e.provenance.primary_response;
  return j;
}

LabeledExample labeled_example_from_json(const nlohmann::json& j) {
  LabeledExample e;
  try {
    e.features.record_id = j.at("record_id").get<std::string>();
    const auto values = j.at("values").get<std::vector<double>>();
    const auto applicable = j.at("applicable").get<std::vector<bool>>();
    if (values.size() != kFeatureCount || applicable.size() != kFeatureCount) {
      throw DataError("feature row " + e.record_id() + ": expected " +
                      std::to_string(kFeatureCount) + " features, got " +
                      std::to_string(values.size()));
    }
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (!std::isfinite(values[i])) {
        throw DataError("feature row " + e.record_id() + ": non-finite value");
      }
      e.features.values[i] = values[i];
      e.features.applicability[i] = applicable[i];
    }
    e.label = j.at("label").get<int>();
    if (e.label != 0 && e.label != 1) throw DataError("feature row " + e.record_id() + ": label must be 0/1");
    e.match_score = j.value("match_score", 0.0);
    for (std::size_t s = 0; s < kAllStrategies.size(); ++s) {
      const std::string name(to_string(kAllStrategies[s]));
      if (j.contains("noop_fallback")) e.provenance.noop_fallback[s] = j["noop_fallback"].value(name, false);
      if (j.contains("generations")) e.provenance.generations[s] = j["generations"].value(name, 0);
    }
    e.provenance.primary_response = j.value("primary_response", std::string{});
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("feature row: ") + ex.what());
  }
  return e;
}

void write_jsonl(const std::filesystem::path& path, std::span<const LabeledExample> examples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& e : examples) out << to_json(e).dump() << '\n';
}

std::vector<LabeledExample> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature table " + path.string());
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    try {
      out.push_back(labeled_example_from_json(j));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_csv(const std::filesystem::path& path, std::span<const LabeledExample> examples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "record_id";
  for (const auto& n : feature_names()) out << ',' << n;
  for (const auto& n : feature_names()) out << ",applicable." << n;
  out << ",label,match_score";
  for (StrategyKind k : kAllStrategies) out << ",noop." << to_string(k);
  for (StrategyKind k : kAllStrategies) out << ",generations." << to_string(k);
  out << '\n';
  out << std::setprecision(17);
  for (const auto& e : examples) {
    // Record ids are quoted so commas inside them survive.
    std::string id = e.record_id();
    std::string quoted = "\"";
    for (char c : id) {
      if (c == '"') quoted.push_back('"');
      quoted.push_back(c);
    }
    quoted.push_back('"');
    out << quoted;
    for (double v : e.features.values) out << ',' << v;
    for (bool a : e.features.applicability) out << ',' << (a ? 1 : 0);
    out << ',' << e.label << ',' << e.match_score;
    for (bool n : e.provenance.noop_fallback) out << ',' << (n ? 1 : 0);
    for (int g : e.provenance.generations) out << ',' << g;
    out << '\n';
  }
}

}  // namespace llmconf
