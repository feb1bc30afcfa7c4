#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "llmconf/confidence_model.hpp"
#include "llmconf/labeler.hpp"

namespace llmconf {

struct ScoredExample {
  std::string record_id;
  double confidence = 0.0;
  int label = 0;
};

// Mann-Whitney form: P(score_pos > score_neg) + 0.5 P(tie). MetricError when
// a class is missing.
double auroc(std::span<const ScoredExample> scored);

// Area under the accuracy-rejection curve: mean retained accuracy over the
// rejection levels k = 0..N-1, rejecting lowest confidence first (ties by
// record_id).
double auarc(std::span<const ScoredExample> scored);

// Expected calibration error over equal-width bins on [0,1]; the last bin
// includes 1.0.
double ece(std::span<const ScoredExample> scored, int bins = 10);

struct Metrics {
  double auroc = 0.0;
  double auarc = 0.0;
  double ece = 0.0;
  std::size_t n_eval = 0;
};

Metrics compute_metrics(std::span<const ScoredExample> scored, int bins = 10);

std::vector<ScoredExample> score(const ConfidenceModel& model,
                                 std::span<const LabeledExample> examples);

struct RunRecord {
  std::uint64_t split_seed = 0;
  double lambda = 0.0;
  Metrics metrics;
};

struct EvalReport {
  double auroc = 0.0, auarc = 0.0, ece = 0.0;
  double std_auroc = 0.0, std_auarc = 0.0, std_ece = 0.0;
  std::size_t n_eval = 0;
  int runs = 0;
  int skipped_splits = 0;  // splits redrawn because a side had one class
  std::size_t train_size = 0;
  std::vector<RunRecord> per_run;
  std::vector<std::pair<std::string, double>> coefficient_ranking;
  std::string config_digest;
  std::string mode;  // "eval" or "transfer"
};

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);
std::string format_table(const EvalReport& report);

struct RunEvalOptions {
  std::size_t train_size = 1000;
  int runs = 5;
  std::uint64_t seed = 0;
  std::vector<double> lambda_grid = {0.0, 1e-4, 1e-3, 1e-2, 1e-1};
  double validation_fraction = 0.2;  // slice of the training split for lambda selection
  int ece_bins = 10;
  int max_redraws = 100;
};

struct EvalOutcome {
  EvalReport report;
  // Model of the first run; its ranking is the report's coefficient_ranking.
  ConfidenceModel model;
  // Held-out confidences of the first run, for external analysis.
  std::vector<ScoredExample> first_run_scores;
};

// Repeated random train/eval splits. Means and sample (n-1) standard
// deviations over runs; a single run reports zero deviation.
EvalOutcome run_eval(std::span<const LabeledExample> data, const RunEvalOptions& options);

// Picks lambda by validation log loss on a tail slice of `train`.
double select_lambda(std::span<const LabeledExample> train, const RunEvalOptions& options);

// Applies a trained model, including its standardization stats, to another
// table without refitting.
EvalReport transfer_eval(const ConfidenceModel& source_model,
                         std::span<const LabeledExample> target, int ece_bins = 10);

// Fraction of (original, perturbed) pairs whose argmax NLI class is entail.
double entailment_audit(std::span<const std::pair<std::string, std::string>> pairs,
                        NliScorer& nli);

void write_scores_csv(const std::filesystem::path& path, std::span<const ScoredExample> scored);

}  // namespace llmconf
