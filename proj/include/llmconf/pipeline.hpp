#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "llmconf/confidence_model.hpp"
#include "llmconf/errors.hpp"
#include "llmconf/evaluation.hpp"
#include "llmconf/labeler.hpp"
#include "llmconf/oracles.hpp"
#include "llmconf/perturbation.hpp"

namespace llmconf {

// Raised when more than the allowed fraction of records fail on oracle calls.
class QuarantineLimitExceeded : public OracleError {
 public:
  using OracleError::OracleError;
};

// How one oracle is provided. kind is "mock", "http", "chat" (generator
// only) or "synthetic" (generator only). Remaining keys are kind-specific:
//   http/chat: url, model (chat), timeout_ms, max_attempts, auth_env
//   mock generator: answers (object prompt -> text)
//   mock nli: contradictions / entailments (arrays of [a, b])
//   synthetic: base_accuracy, noise, seed, name
using OracleSpec = nlohmann::json;

struct RunConfig {
  std::string dataset_path;
  std::string template_id = "synthetic";
  std::string templates_dir = "templates";
  OracleSpec generator = {{"kind", "mock"}};
  OracleSpec nli = {{"kind", "mock"}};
  OracleSpec translator = {{"kind", "mock"}};
  OracleSpec ner = {{"kind", "mock"}};
  SamplingDefaults sampling;
  std::string pivot_language = "fr";
  std::set<StrategyKind> strategies = {kAllStrategies.begin(), kAllStrategies.end()};
  int generations = 5;
  std::size_t max_splits = 10;
  double theta = 0.3;
  std::size_t train_size = 1000;
  int runs = 5;
  std::uint64_t seed = 0;
  std::vector<double> lambda_grid = {0.0, 1e-4, 1e-3, 1e-2, 1e-1};
  std::string cache_dir;  // empty disables caching
  std::string output_dir = "out";
  int workers = 8;
  double quarantine_threshold = 0.10;

  // ConfigError on any invariant violation.
  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& path);
  std::string digest() const;
};

// JSONL, one record per line: {id, question, context?, gold_answers,
// template_id?}. Records without template_id get `default_template_id`.
std::vector<PromptRecord> ingest(const std::filesystem::path& path,
                                 const std::string& default_template_id = "synthetic");

// Resolves a template id: "synthetic" is built in, anything else is read
// from <templates_dir>/<id>.txt (one trailing newline stripped).
std::string load_template(const std::string& template_id, const std::string& templates_dir);

// Live oracle handles plus the undecorated backends whose counters measure
// real calls.
struct OracleSet {
  std::shared_ptr<Generator> generator;
  std::shared_ptr<NliScorer> nli;
  std::shared_ptr<Translator> translator;
  std::shared_ptr<EntityDetector> ner;
  std::shared_ptr<Oracle> generator_backend;
  std::shared_ptr<Oracle> nli_backend;
  std::shared_ptr<Oracle> translator_backend;
  std::shared_ptr<Oracle> ner_backend;

  nlohmann::json call_counts() const;
};

// Builds backends from the config's specs and wraps them with the response
// cache when cache_dir is set. `records` feeds the synthetic generator.
OracleSet make_oracles(const RunConfig& config, const std::vector<PromptRecord>& records);

// Wraps already-constructed backends (used by tests to inspect counters).
OracleSet wrap_oracles(const RunConfig& config, std::shared_ptr<Generator> generator,
                       std::shared_ptr<NliScorer> nli, std::shared_ptr<Translator> translator,
                       std::shared_ptr<EntityDetector> ner);

struct QuarantinedRecord {
  std::string record_id;
  std::string error;
};

struct ExtractResult {
  std::vector<LabeledExample> rows;  // dataset order
  std::vector<QuarantinedRecord> quarantined;
  std::map<StrategyKind, std::size_t> noop_counts;
};

// Featurizes and labels one record with every enabled strategy.
LabeledExample process_record(const PromptRecord& record, const std::string& template_text,
                              const RunConfig& config, OracleSet& oracles);

// Runs process_record over all records on a bounded worker pool. Oracle and
// data failures are quarantined per record; throws QuarantineLimitExceeded
// when their share exceeds config.quarantine_threshold.
ExtractResult extract(const RunConfig& config, const std::vector<PromptRecord>& records,
                      OracleSet& oracles);

// extract plus persistence: features.jsonl, features.csv, errors.jsonl and
// the manifest's extract stage, all under config.output_dir.
ExtractResult run_extract(const RunConfig& config, OracleSet& oracles,
                          const std::vector<PromptRecord>& records);

// Fits one model on a seeded train_size split (all rows when the table is
// not larger than train_size), selecting lambda from the grid.
ConfidenceModel train_model(const RunConfig& config, std::span<const LabeledExample> table);

// Full evaluation protocol; the first run's model is the emitted artifact.
EvalOutcome train_and_eval(const RunConfig& config, std::span<const LabeledExample> table);

EvalReport transfer(const RunConfig& config, const std::filesystem::path& source_model_path,
                    const std::filesystem::path& target_table_path);

struct AuditResult {
  std::map<StrategyKind, double> entailed_fraction;
  std::map<StrategyKind, std::size_t> pairs;
};

// Pairs each record's original prompt with the first perturbed prompt of
// PP, SP, EFA and SR, and measures how often the original entails it.
AuditResult audit_entailment(const RunConfig& config, const std::vector<PromptRecord>& records,
                             OracleSet& oracles);

// Read-modify-write of <output_dir>/manifest.json: records a stage with its
// input/output file digests and extra fields.
void update_manifest(const RunConfig& config, const std::string& stage,
                     const std::map<std::string, std::filesystem::path>& inputs,
                     const std::map<std::string, std::filesystem::path>& outputs,
                     const nlohmann::json& extra);

std::string file_digest(const std::filesystem::path& path);

}  // namespace llmconf
