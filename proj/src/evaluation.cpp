#include "llmconf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "llmconf/errors.hpp"
#include "llmconf/random.hpp"

namespace llmconf {
namespace {

void check_finite(std::span<const ScoredExample> scored) {
  for (const auto& s : scored) {
    if (!std::isfinite(s.confidence)) throw MetricError("non-finite confidence for " + s.record_id);
    if (s.label != 0 && s.label != 1) throw MetricError("label must be 0/1 for " + s.record_id);
  }
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

bool both_classes(std::span<const LabeledExample> rows) {
  bool pos = false, neg = false;
  for (const auto& r : rows) (r.label == 1 ? pos : neg) = true;
  return pos && neg;
}

std::vector<LabeledExample> gather(std::span<const LabeledExample> data,
                                   std::span<const std::size_t> idx) {
  std::vector<LabeledExample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data[i]);
  return out;
}

double log_loss(const ConfidenceModel& model, std::span<const LabeledExample> rows) {
  double loss = 0.0;
  for (const auto& r : rows) {
    const double p = model.predict_proba(r.features);
    loss -= r.label == 1 ? std::log(p) : std::log1p(-p);
  }
  return loss / static_cast<double>(rows.size());
}

}  // namespace

double auroc(std::span<const ScoredExample> scored) {
  check_finite(scored);
  // Average ranks over tied groups; the positive rank sum gives U.
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scored[a].confidence < scored[b].confidence;
  });
  double n_pos = 0.0, n_neg = 0.0, rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scored[order[j]].confidence == scored[order[i]].confidence) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (scored[order[k]].label == 1) {
        rank_sum_pos += avg_rank;
        n_pos += 1.0;
      } else {
        n_neg += 1.0;
      }
    }
    i = j;
  }
  if (n_pos == 0.0 || n_neg == 0.0) throw MetricError("auroc: both classes must be present");
  const double u = rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0;
  return u / (n_pos * n_neg);
}

double auarc(std::span<const ScoredExample> scored) {
  check_finite(scored);
  if (scored.empty()) throw MetricError("auarc: no examples");
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scored[a].confidence != scored[b].confidence) {
      return scored[a].confidence < scored[b].confidence;
    }
    return scored[a].record_id < scored[b].record_id;
  });
  const std::size_t n = order.size();
  // Retained set after rejecting k items is order[k..n).
  double correct_retained = 0.0;
  double total = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    correct_retained += scored[order[k]].label;
    total += correct_retained / static_cast<double>(n - k);
  }
  return total / static_cast<double>(n);
}

double ece(std::span<const ScoredExample> scored, int bins) {
  check_finite(scored);
  if (bins < 1) throw MetricError("ece: bins must be >= 1");
  if (scored.empty()) throw MetricError("ece: no examples");
  std::vector<double> conf_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> acc_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
  for (const auto& s : scored) {
    if (s.confidence < 0.0 || s.confidence > 1.0) {
      throw MetricError("ece: confidence outside [0,1] for " + s.record_id);
    }
    auto b = static_cast<std::size_t>(std::floor(s.confidence * bins));
    b = std::min(b, static_cast<std::size_t>(bins - 1));
    conf_sum[b] += s.confidence;
    acc_sum[b] += s.label;
    count[b] += 1.0;
  }
  double total = 0.0;
  const double n = static_cast<double>(scored.size());
  for (std::size_t b = 0; b < count.size(); ++b) {
    if (count[b] == 0.0) continue;
    total += (count[b] / n) * std::abs(acc_sum[b] / count[b] - conf_sum[b] / count[b]);
  }
  return total;
}

Metrics compute_metrics(std::span<const ScoredExample> scored, int bins) {
  return {auroc(scored), auarc(scored), ece(scored, bins), scored.size()};
}

std::vector<ScoredExample> score(const ConfidenceModel& model,
                                 std::span<const LabeledExample> examples) {
  std::vector<ScoredExample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    out.push_back({e.record_id(), model.predict_proba(e.features), e.label});
  }
  return out;
}

double select_lambda(std::span<const LabeledExample> train, const RunEvalOptions& options) {
  const auto& grid = options.lambda_grid;
  if (grid.empty()) throw ConfigError("lambda grid is empty");
  if (grid.size() == 1) return grid.front();

  const auto fallback = [&] {
    const auto it = std::find(grid.begin(), grid.end(), kDefaultLambda);
    return it != grid.end() ? *it : grid.front();
  };
  auto n_val = static_cast<std::size_t>(
      std::floor(options.validation_fraction * static_cast<double>(train.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, train.size() > 2 ? train.size() - 2 : 1);
  const auto fit_part = train.subspan(0, train.size() - n_val);
  const auto val_part = train.subspan(train.size() - n_val);
  if (!both_classes(fit_part) || val_part.empty()) return fallback();

  double best_lambda = grid.front();
  double best_loss = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    const ConfidenceModel m = fit(fit_part, lambda, options.seed);
    const double loss = log_loss(m, val_part);
    if (loss < best_loss) {
      best_loss = loss;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

EvalOutcome run_eval(std::span<const LabeledExample> data, const RunEvalOptions& options) {
  if (options.runs < 1) throw ConfigError("runs must be >= 1");
  if (options.train_size < 2) throw ConfigError("train_size must be >= 2");
  if (data.size() <= options.train_size) {
    throw DataError("dataset has " + std::to_string(data.size()) +
                    " rows; need more than train_size=" + std::to_string(options.train_size));
  }

  EvalOutcome outcome;
  EvalReport& report = outcome.report;
  report.mode = "eval";
  report.train_size = options.train_size;
  std::vector<double> aurocs, auarcs, eces;
  std::uint64_t draw = 0;

  for (int run = 0; run < options.runs; ++run) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > options.max_redraws) {
        throw TrainingError("could not draw a split with both classes on each side after " +
                            std::to_string(options.max_redraws) + " attempts");
      }
      const std::uint64_t split_seed = derive_seed(options.seed, "split", draw++);
      std::vector<std::size_t> idx(data.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      Rng rng(split_seed);
      rng.shuffle(idx);
      const std::span<const std::size_t> all(idx);
      const auto train = gather(data, all.subspan(0, options.train_size));
      const auto held_out = gather(data, all.subspan(options.train_size));
      if (!both_classes(train) || !both_classes(held_out)) {
        ++report.skipped_splits;
        continue;
      }
      RunEvalOptions inner = options;
      inner.seed = split_seed;
      const double lambda = select_lambda(train, inner);
      ConfidenceModel model = fit(train, lambda, split_seed);
      const auto scored = score(model, held_out);
      const Metrics m = compute_metrics(scored, options.ece_bins);
      report.per_run.push_back({split_seed, lambda, m});
      aurocs.push_back(m.auroc);
      auarcs.push_back(m.auarc);
      eces.push_back(m.ece);
      if (run == 0) {
        outcome.model = std::move(model);
        outcome.first_run_scores = scored;
      }
      break;
    }
  }

  report.runs = options.runs;
  report.n_eval = data.size() - options.train_size;
  report.auroc = mean(aurocs);
  report.auarc = mean(auarcs);
  report.ece = mean(eces);
  report.std_auroc = sample_std(aurocs);
  report.std_auarc = sample_std(auarcs);
  report.std_ece = sample_std(eces);
  report.coefficient_ranking = coefficient_report(outcome.model);
  return outcome;
}

EvalReport transfer_eval(const ConfidenceModel& source_model, std::span<const LabeledExample> target,
                         int ece_bins) {
  const auto& names = feature_names();
  if (source_model.weights.size() != kFeatureCount ||
      !std::equal(names.begin(), names.end(), source_model.feature_names.begin(),
                  source_model.feature_names.end())) {
    throw DataError("transfer: model feature layout does not match the " +
                    std::to_string(kFeatureCount) + "-slot feature table");
  }
  if (target.empty()) throw DataError("transfer: empty target table");
  const auto scored = score(source_model, target);
  const Metrics m = compute_metrics(scored, ece_bins);
  EvalReport report;
  report.mode = "transfer";
  report.auroc = m.auroc;
  report.auarc = m.auarc;
  report.ece = m.ece;
  report.n_eval = m.n_eval;
  report.runs = 1;
  report.train_size = source_model.train_meta.n_train;
  report.per_run.push_back({source_model.train_meta.seed, source_model.lambda_l2, m});
  report.coefficient_ranking = coefficient_report(source_model);
  return report;
}

double entailment_audit(std::span<const std::pair<std::string, std::string>> pairs,
                        NliScorer& nli) {
  if (pairs.empty()) throw DataError("entailment_audit: no pairs");
  std::size_t entailed = 0;
  for (const auto& [original, perturbed] : pairs) {
    if (nli.nli(original, perturbed).argmax() == NliLabel::kEntail) ++entailed;
  }
  return static_cast<double>(entailed) / static_cast<double>(pairs.size());
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& pr : r.per_run) {
    runs.push_back({{"split_seed", pr.split_seed},
                    {"lambda", pr.lambda},
                    {"auroc", pr.metrics.auroc},
                    {"auarc", pr.metrics.auarc},
                    {"ece", pr.metrics.ece},
                    {"n_eval", pr.metrics.n_eval}});
  }
  nlohmann::json ranking = nlohmann::json::array();
  for (std::size_t i = 0; i < r.coefficient_ranking.size(); ++i) {
    ranking.push_back({{"rank", i + 1},
                       {"feature", r.coefficient_ranking[i].first},
                       {"coefficient", r.coefficient_ranking[i].second}});
  }
  return {{"mode", r.mode},
          {"auroc", r.auroc},
          {"auarc", r.auarc},
          {"ece", r.ece},
          {"std_auroc", r.std_auroc},
          {"std_auarc", r.std_auarc},
          {"std_ece", r.std_ece},
          {"n_eval", r.n_eval},
          {"runs", r.runs},
          {"skipped_splits", r.skipped_splits},
          {"train_size", r.train_size},
          {"per_run", runs},
          {"coefficient_ranking", ranking},
          {"config_digest", r.config_digest}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.mode = j.value("mode", std::string("eval"));
    r.auroc = j.at("auroc").get<double>();
    r.auarc = j.at("auarc").get<double>();
    r.ece = j.at("ece").get<double>();
    r.std_auroc = j.at("std_auroc").get<double>();
    r.std_auarc = j.at("std_auarc").get<double>();
    r.std_ece = j.at("std_ece").get<double>();
    r.n_eval = j.at("n_eval").get<std::size_t>();
    r.runs = j.at("runs").get<int>();
    r.skipped_splits = j.value("skipped_splits", 0);
    r.train_size = j.value("train_size", std::size_t{0});
    for (const auto& pr : j.value("per_run", nlohmann::json::array())) {
      RunRecord rec;
      rec.split_seed = pr.at("split_seed").get<std::uint64_t>();
      rec.lambda = pr.at("lambda").get<double>();
      rec.metrics = {pr.at("auroc").get<double>(), pr.at("auarc").get<double>(),
                     pr.at("ece").get<double>(), pr.at("n_eval").get<std::size_t>()};
      r.per_run.push_back(rec);
    }
    for (const auto& c : j.value("coefficient_ranking", nlohmann::json::array())) {
      r.coefficient_ranking.emplace_back(c.at("feature").get<std::string>(),
                                         c.at("coefficient").get<double>());
    }
    r.config_digest = j.value("config_digest", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
  return r;
}

std::string format_table(const EvalReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "mode: " << r.mode << "   runs: " << r.runs << "   train_size: " << r.train_size
     << "   n_eval: " << r.n_eval << "\n";
  os << "metric   mean     std\n";
  os << "AUROC    " << r.auroc << "   " << r.std_auroc << "   (higher is better)\n";
  os << "AUARC    " << r.auarc << "   " << r.std_auarc << "   (higher is better)\n";
  os << "ECE      " << r.ece << "   " << r.std_ece << "   (lower is better)\n";
  if (r.skipped_splits > 0) os << "skipped single-class splits: " << r.skipped_splits << "\n";
  if (!r.coefficient_ranking.empty()) {
    os << "\nrank  feature          coefficient\n";
    for (std::size_t i = 0; i < r.coefficient_ranking.size(); ++i) {
      os << std::setw(4) << i + 1 << "  " << std::left << std::setw(15)
         << r.coefficient_ranking[i].first << std::right << "  " << std::setw(10)
         << r.coefficient_ranking[i].second << "\n";
    }
  }
  return os.str();
}

void write_scores_csv(const std::filesystem::path& path, std::span<const ScoredExample> scored) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "record_id,confidence,label\n" << std::setprecision(17);
  for (const auto& s : scored) out << '"' << s.record_id << "\"," << s.confidence << ',' << s.label << '\n';
}

}  // namespace llmconf
