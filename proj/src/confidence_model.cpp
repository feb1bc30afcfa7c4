#include "llmconf/confidence_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "llmconf/digest.hpp"
#include "llmconf/errors.hpp"

namespace llmconf {
namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b); }

Eigen::VectorXd newton_direction(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& grad) {
  const Eigen::Index n = hessian.rows();
  double damping = 0.0;
  const double scale = std::max(1.0, hessian.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 20; ++attempt) {
    Eigen::MatrixXd h = hessian;
    if (damping > 0.0) h.diagonal().array() += damping;
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd d = -llt.solve(grad);
      if (d.allFinite()) return d;
    }
    damping = damping == 0.0 ? 1e-12 * scale : damping * 10.0;
  }
  return Eigen::VectorXd::Zero(n);
}

}  // namespace

double sigmoid(double z) {
  // Clamping keeps the result strictly inside (0,1) in double precision.
  z = std::clamp(z, -35.0, 35.0);
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

StandardizationStats StandardizationStats::compute(const Eigen::MatrixXd& raw) {
  StandardizationStats s;
  const auto n = static_cast<double>(raw.rows());
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    const double mean = raw.col(c).mean();
    const double var = (raw.col(c).array() - mean).square().sum() / n;
    s.mean.push_back(mean);
    s.stddev.push_back(std::max(std::sqrt(var), kStddevFloor));
  }
  return s;
}

Eigen::MatrixXd StandardizationStats::apply(const Eigen::MatrixXd& raw) const {
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    const auto cc = static_cast<std::size_t>(c);
    out.col(c) = (raw.col(c).array() - mean[cc]) / stddev[cc];
  }
  return out;
}

Eigen::VectorXd StandardizationStats::apply(std::span<const double> raw) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t c = 0; c < raw.size(); ++c) {
    out(static_cast<Eigen::Index>(c)) = (raw[c] - mean[c]) / stddev[c];
  }
  return out;
}

LogisticObjective::LogisticObjective(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                     double lambda)
    : features_(features), labels_(labels), lambda_(lambda) {}

Eigen::VectorXd LogisticObjective::margins(const Eigen::VectorXd& params) const {
  const Eigen::Index d = features_.cols();
  return (features_ * params.head(d)).array() + params(d);
}

double LogisticObjective::value(const Eigen::VectorXd& params) const {
  const Eigen::VectorXd z = margins(params);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) loss += softplus(z(i)) - labels_(i) * z(i);
  loss /= static_cast<double>(z.size());
  const Eigen::Index d = features_.cols();
  return loss + 0.5 * lambda_ * params.head(d).squaredNorm();
}

Eigen::VectorXd LogisticObjective::gradient(const Eigen::VectorXd& params) const {
  const Eigen::VectorXd z = margins(params);
  Eigen::VectorXd residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) residual(i) = sigmoid(z(i)) - labels_(i);
  const double n = static_cast<double>(z.size());
  const Eigen::Index d = features_.cols();
  Eigen::VectorXd g(d + 1);
  g.head(d) = features_.transpose() * residual / n + lambda_ * params.head(d);
  g(d) = residual.sum() / n;
  return g;
}

Eigen::MatrixXd LogisticObjective::hessian(const Eigen::VectorXd& params) const {
  const Eigen::VectorXd z = margins(params);
  const Eigen::Index n = features_.rows();
  const Eigen::Index d = features_.cols();
  Eigen::MatrixXd augmented(n, d + 1);
  augmented.leftCols(d) = features_;
  augmented.col(d).setOnes();
  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = sigmoid(z(i));
    weights(i) = p * (1.0 - p);
  }
  Eigen::MatrixXd h =
      augmented.transpose() * weights.asDiagonal() * augmented / static_cast<double>(n);
  h.diagonal().head(d).array() += lambda_;
  return h;
}

Solution minimize(const LogisticObjective& objective, const FitOptions& options) {
  Solution sol;
  sol.params = options.initial_params.value_or(Eigen::VectorXd::Zero(objective.dim()));
  double f = objective.value(sol.params);
  sol.loss_history.push_back(f);

  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-16;

  // Backtracking from a unit step; returns the accepted step length or 0.
  auto line_search = [&](const Eigen::VectorXd& dir, double slope, double& f_new) {
    for (double t = 1.0; t > kMinStep; t *= 0.5) {
      f_new = objective.value(sol.params + t * dir);
      if (std::isfinite(f_new) && f_new <= f + kArmijo * t * slope) return t;
    }
    return 0.0;
  };

  Eigen::VectorXd g = objective.gradient(sol.params);
  for (; sol.iterations < options.max_iterations; ++sol.iterations) {
    if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      sol.converged = true;
      break;
    }
    Eigen::VectorXd dir = newton_direction(objective.hessian(sol.params), g);
    double slope = dot(g, dir);
    double f_new = f;
    double step = slope < 0.0 ? line_search(dir, slope, f_new) : 0.0;

    if (step == 0.0) {
      // Near the optimum the Armijo test can fail from rounding alone; take
      // the full Newton step if it does not raise the loss and shrinks the
      // gradient.
      if (slope < 0.0) {
        const Eigen::VectorXd trial = sol.params + dir;
        const double f_trial = objective.value(trial);
        const Eigen::VectorXd g_trial = objective.gradient(trial);
        if (f_trial <= f && g_trial.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>()) {
          sol.params = trial;
          f = f_trial;
          g = g_trial;
          sol.loss_history.push_back(f);
          continue;
        }
      }
      ++sol.gradient_fallbacks;
      dir = -g;
      slope = -g.squaredNorm();
      step = line_search(dir, slope, f_new);
      if (step == 0.0) break;  // no descent possible in floating point
    }
    sol.params += step * dir;
    f = f_new;
    g = objective.gradient(sol.params);
    sol.loss_history.push_back(f);
  }
  if (!sol.converged && g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
    sol.converged = true;
  }
  sol.final_grad_norm = g.lpNorm<Eigen::Infinity>();
  return sol;
}

double ConfidenceModel::predict_proba(std::span<const double> raw_features) const {
  if (raw_features.size() != weights.size()) {
    throw DataError("predict_proba: expected " + std::to_string(weights.size()) +
                    " features, got " + std::to_string(raw_features.size()));
  }
  const Eigen::VectorXd x = stats.apply(raw_features);
  double z = intercept;
  for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * x(static_cast<Eigen::Index>(i));
  return sigmoid(z);
}

double ConfidenceModel::predict_proba(const FeatureVector& features) const {
  return predict_proba(std::span<const double>(features.values));
}

ConfidenceModel fit_matrix(const Eigen::MatrixXd& raw, const Eigen::VectorXd& labels,
                           std::vector<std::string> feature_names, double lambda_l2,
                           std::uint64_t seed, const FitOptions& options) {
  if (raw.rows() != labels.size()) throw DataError("fit: row/label count mismatch");
  if (static_cast<std::size_t>(raw.cols()) != feature_names.size()) {
    throw DataError("fit: feature name count does not match columns");
  }
  if (raw.rows() < 2) throw TrainingError("fit: need at least 2 examples");
  if (!raw.allFinite()) throw DataError("fit: non-finite feature value");
  if (!(lambda_l2 >= 0.0) || !std::isfinite(lambda_l2)) {
    throw ConfigError("fit: lambda must be a non-negative finite number");
  }
  const double positives = labels.sum();
  if (positives == 0.0) throw TrainingError("fit: training data has no examples of class 1");
  if (positives == static_cast<double>(labels.size())) {
    throw TrainingError("fit: training data has no examples of class 0");
  }

  ConfidenceModel model;
  model.stats = StandardizationStats::compute(raw);
  const Eigen::MatrixXd x = model.stats.apply(raw);
  const LogisticObjective objective(x, labels, lambda_l2);
  const Solution sol = minimize(objective, options);

  const Eigen::Index d = raw.cols();
  model.weights.assign(sol.params.data(), sol.params.data() + d);
  model.intercept = sol.params(d);
  model.feature_names = std::move(feature_names);
  model.lambda_l2 = lambda_l2;
  model.train_meta = {static_cast<std::size_t>(raw.rows()), seed, sol.converged,
                      sol.final_grad_norm, sol.iterations};
  return model;
}

Eigen::MatrixXd design_matrix(std::span<const LabeledExample> examples) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(examples.size()), static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = examples[i].features.values[c];
    }
  }
  return m;
}

Eigen::VectorXd label_vector(std::span<const LabeledExample> examples) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(examples.size()));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = examples[i].label;
  }
  return y;
}

ConfidenceModel fit(std::span<const LabeledExample> examples, double lambda_l2, std::uint64_t seed,
                    const FitOptions& options) {
  const auto& names = feature_names();
  return fit_matrix(design_matrix(examples), label_vector(examples),
                    std::vector<std::string>(names.begin(), names.end()), lambda_l2, seed, options);
}

std::vector<std::pair<std::string, double>> coefficient_report(const ConfidenceModel& model) {
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    if (std::abs(model.weights[i]) > kCoefficientThreshold) {
      out.emplace_back(model.feature_names[i], model.weights[i]);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::abs(a.second) > std::abs(b.second);
  });
  return out;
}

namespace {

nlohmann::json model_body(const ConfidenceModel& m) {
  return {
      {"format_version", std::string(kModelFormatVersion)},
      {"feature_names", m.feature_names},
      {"weights", m.weights},
      {"intercept", m.intercept},
      {"stats", {{"mean", m.stats.mean}, {"stddev", m.stats.stddev}}},
      {"lambda_l2", m.lambda_l2},
      {"train_meta",
       {{"n_train", m.train_meta.n_train},
        {"seed", m.train_meta.seed},
        {"converged", m.train_meta.converged},
        {"final_grad_norm", m.train_meta.final_grad_norm},
        {"iterations", m.train_meta.iterations}}},
  };
}

}  // namespace

nlohmann::json to_json(const ConfidenceModel& model) {
  nlohmann::json j = model_body(model);
  j["digest"] = sha256_hex(j.dump());
  return j;
}

ConfidenceModel model_from_json(const nlohmann::json& j) {
  ConfidenceModel m;
  try {
    const auto version = j.at("format_version").get<std::string>();
    if (version != kModelFormatVersion) {
      throw DataError("model artifact: unsupported format version " + version);
    }
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.stats.mean = j.at("stats").at("mean").get<std::vector<double>>();
    m.stats.stddev = j.at("stats").at("stddev").get<std::vector<double>>();
    m.lambda_l2 = j.at("lambda_l2").get<double>();
    const auto& meta = j.at("train_meta");
    m.train_meta.n_train = meta.at("n_train").get<std::size_t>();
    m.train_meta.seed = meta.at("seed").get<std::uint64_t>();
    m.train_meta.converged = meta.at("converged").get<bool>();
    m.train_meta.final_grad_norm = meta.at("final_grad_norm").get<double>();
    m.train_meta.iterations = meta.at("iterations").get<int>();
    const auto digest = j.at("digest").get<std::string>();
    if (sha256_hex(model_body(m).dump()) != digest) {
      throw DataError("model artifact: digest mismatch (corrupt or edited)");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model artifact: ") + e.what());
  }
  const std::size_t d = m.weights.size();
  if (m.feature_names.size() != d || m.stats.mean.size() != d || m.stats.stddev.size() != d) {
    throw DataError("model artifact: inconsistent feature arity");
  }
  return m;
}

void save(const ConfidenceModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(model).dump(2) << '\n';
}

ConfidenceModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model artifact " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto j = nlohmann::json::parse(ss.str(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw DataError("model artifact: invalid JSON in " + path.string());
  return model_from_json(j);
}

}  // namespace llmconf
