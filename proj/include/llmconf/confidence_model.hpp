#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "llmconf/labeler.hpp"

namespace llmconf {

struct StandardizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population stddev, floored at kStddevFloor

  static constexpr double kStddevFloor = 1e-9;

  static StandardizationStats compute(const Eigen::MatrixXd& raw);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const;
  Eigen::VectorXd apply(std::span<const double> raw) const;
};

// Mean logistic loss plus (lambda/2)*||w||^2 over standardized features.
// Parameters are packed as [w_0 .. w_{d-1}, intercept]; the intercept is not
// penalized.
class LogisticObjective {
 public:
  LogisticObjective(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels, double lambda);

  double value(const Eigen::VectorXd& params) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& params) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& params) const;
  Eigen::Index dim() const { return features_.cols() + 1; }

 private:
  Eigen::VectorXd margins(const Eigen::VectorXd& params) const;

  const Eigen::MatrixXd& features_;
  const Eigen::VectorXd& labels_;
  double lambda_;
};

struct FitOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;  // infinity norm
  std::optional<Eigen::VectorXd> initial_params;  // default: zeros
};

struct Solution {
  Eigen::VectorXd params;
  bool converged = false;
  double final_grad_norm = 0.0;
  int iterations = 0;
  int gradient_fallbacks = 0;
  std::vector<double> loss_history;  // objective after each accepted step
};

// Damped Newton with backtracking line search; falls back to a gradient step
// when the Newton direction cannot be computed or makes no progress.
Solution minimize(const LogisticObjective& objective, const FitOptions& options = {});

struct TrainMeta {
  std::size_t n_train = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  double final_grad_norm = 0.0;
  int iterations = 0;
};

struct ConfidenceModel {
  std::vector<double> weights;
  double intercept = 0.0;
  StandardizationStats stats;
  std::vector<std::string> feature_names;
  double lambda_l2 = 0.0;
  TrainMeta train_meta;

  // sigmoid(w . standardize(x) + b), strictly inside (0,1).
  double predict_proba(std::span<const double> raw_features) const;
  double predict_proba(const FeatureVector& features) const;
};

inline constexpr double kDefaultLambda = 1e-3;
inline constexpr double kCoefficientThreshold = 1e-4;

// Fits on raw (unstandardized) rows. Throws TrainingError for fewer than two
// examples or a missing class, DataError for non-finite values.
ConfidenceModel fit_matrix(const Eigen::MatrixXd& raw, const Eigen::VectorXd& labels,
                           std::vector<std::string> feature_names, double lambda_l2,
                           std::uint64_t seed, const FitOptions& options = {});

ConfidenceModel fit(std::span<const LabeledExample> examples, double lambda_l2, std::uint64_t seed,
                    const FitOptions& options = {});

Eigen::MatrixXd design_matrix(std::span<const LabeledExample> examples);
Eigen::VectorXd label_vector(std::span<const LabeledExample> examples);

// Features with |coefficient| > 1e-4, largest magnitude first, in
// standardized units.
std::vector<std::pair<std::string, double>> coefficient_report(const ConfidenceModel& model);

inline constexpr std::string_view kModelFormatVersion = "1";

nlohmann::json to_json(const ConfidenceModel& model);  // includes "digest"
ConfidenceModel model_from_json(const nlohmann::json& j);  // verifies version and digest
void save(const ConfidenceModel& model, const std::filesystem::path& path);
ConfidenceModel load(const std::filesystem::path& path);

double sigmoid(double z);

}  // namespace llmconf
