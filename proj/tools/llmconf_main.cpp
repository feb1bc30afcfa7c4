// Command-line driver: ingest-check, extract, train, eval, transfer,
// audit-entailment, report.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "llmconf/errors.hpp"
#include "llmconf/pipeline.hpp"
#include "llmconf/synthetic.hpp"

namespace {

using namespace llmconf;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitOracle = 4;

// Flag values collected before the config file is loaded, applied on top.
struct Overrides {
  std::string config_path;
  std::optional<std::string> dataset, template_id, templates_dir, cache_dir, output_dir;
  std::optional<std::string> strategies, lambda_grid;
  std::optional<int> generations, runs, workers;
  std::optional<double> theta, lambda, quarantine_threshold;
  std::optional<std::size_t> train_size;
  std::optional<std::uint64_t> seed;
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

RunConfig resolve(const Overrides& o) {
  json j = json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError("cannot open config " + o.config_path);
    j = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("config: invalid JSON in " + o.config_path);
  }
  if (o.dataset) j["dataset_path"] = *o.dataset;
  if (o.template_id) j["template_id"] = *o.template_id;
  if (o.templates_dir) j["templates_dir"] = *o.templates_dir;
  if (o.cache_dir) j["cache_dir"] = *o.cache_dir;
  if (o.output_dir) j["output_dir"] = *o.output_dir;
  if (o.strategies) j["strategies"] = split_csv(*o.strategies);
  if (o.generations) j["generations"] = *o.generations;
  if (o.runs) j["runs"] = *o.runs;
  if (o.workers) j["workers"] = *o.workers;
  if (o.theta) j["theta"] = *o.theta;
  if (o.quarantine_threshold) j["quarantine_threshold"] = *o.quarantine_threshold;
  if (o.train_size) j["train_size"] = *o.train_size;
  if (o.seed) j["seed"] = *o.seed;
  if (o.lambda_grid) {
    std::vector<double> grid;
    for (const auto& s : split_csv(*o.lambda_grid)) {
      try {
        grid.push_back(std::stod(s));
      } catch (const std::exception&) {
        throw ConfigError("bad --lambda-grid value: " + s);
      }
    }
    j["lambda_grid"] = grid;
  }
  if (o.lambda) j["lambda_grid"] = std::vector<double>{*o.lambda};
  return RunConfig::from_json(j);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

fs::path features_path(const RunConfig& config, const std::optional<std::string>& flag) {
  return flag ? fs::path(*flag) : fs::path(config.output_dir) / "features.jsonl";
}

std::vector<LabeledExample> load_table(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("feature table not found: " + path.string());
  return read_jsonl(path);
}

void print_ranking(const std::vector<std::pair<std::string, double>>& ranking) {
  std::cout << "coefficients (standardized, |w| > 1e-4):\n";
  for (const auto& [name, w] : ranking) std::printf("  %-14s %+.6f\n", name.c_str(), w);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box confidence estimation for LLM answers"};
  app.require_subcommand(1);
  Overrides o;
  std::optional<std::string> features, model, target, report;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config_path, "JSON config file");
    sub->add_option("--dataset", o.dataset, "JSONL dataset");
    sub->add_option("--template", o.template_id, "prompt template id");
    sub->add_option("--templates-dir", o.templates_dir, "directory of <id>.txt templates");
    sub->add_option("--strategies", o.strategies, "comma-separated subset of SD,PP,SP,EFA,SR,SRC");
    sub->add_option("--generations", o.generations, "generations per strategy");
    sub->add_option("--theta", o.theta, "ROUGE-L threshold for the correctness label");
    sub->add_option("--train-size", o.train_size, "training split size");
    sub->add_option("--runs", o.runs, "number of random splits");
    sub->add_option("--seed", o.seed, "root seed");
    sub->add_option("--lambda", o.lambda, "fixed L2 strength (disables grid search)");
    sub->add_option("--lambda-grid", o.lambda_grid, "comma-separated L2 strengths");
    sub->add_option("--cache-dir", o.cache_dir, "response cache directory");
    sub->add_option("--output-dir", o.output_dir, "output directory");
    sub->add_option("--workers", o.workers, "extraction worker threads");
    sub->add_option("--quarantine-threshold", o.quarantine_threshold,
                    "max fraction of records allowed to fail");
  };

  auto* ingest_cmd = app.add_subcommand("ingest-check", "validate a dataset");
  auto* extract_cmd = app.add_subcommand("extract", "generate responses and build the feature table");
  auto* train_cmd = app.add_subcommand("train", "fit one confidence model");
  auto* eval_cmd = app.add_subcommand("eval", "repeated-split evaluation");
  auto* transfer_cmd = app.add_subcommand("transfer", "apply a trained model to another table");
  auto* audit_cmd = app.add_subcommand("audit-entailment", "NLI audit of perturbed prompts");
  auto* report_cmd = app.add_subcommand("report", "print a saved report as a table");
  for (auto* sub : {ingest_cmd, extract_cmd, train_cmd, eval_cmd, transfer_cmd, audit_cmd, report_cmd}) {
    add_common(sub);
  }
  for (auto* sub : {train_cmd, eval_cmd}) {
    sub->add_option("--features", features, "feature table (default <output-dir>/features.jsonl)");
  }
  transfer_cmd->add_option("--model", model, "source model.json")->required();
  transfer_cmd->add_option("--target", target, "target feature table")->required();
  report_cmd->add_option("--report", report, "report.json (default <output-dir>/report.json)");

  // Not part of the pipeline proper: writes a synthetic QA dataset for demos.
  auto* synth_cmd = app.add_subcommand("make-synthetic", "write a synthetic JSONL dataset");
  std::size_t synth_count = 200;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  synth_cmd->add_option("--count", synth_count, "number of records");
  synth_cmd->add_option("--seed", synth_seed, "dataset seed");
  synth_cmd->add_option("--out", synth_out, "output JSONL path")->required();

  CLI11_PARSE(app, argc, argv);

  if (synth_cmd->parsed()) {
    std::ofstream out(synth_out, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "config error: cannot write " << synth_out << '\n';
      return kExitConfig;
    }
    for (const auto& r : make_synthetic_dataset(synth_count, synth_seed)) {
      json j = {{"id", r.id}, {"question", r.question}, {"gold_answers", r.gold_answers}};
      if (r.context) j["context"] = *r.context;
      out << j.dump() << '\n';
    }
    return 0;
  }

  try {
    const RunConfig config = resolve(o);
    const fs::path out_dir(config.output_dir);

    if (ingest_cmd->parsed()) {
      const auto records = ingest(config.dataset_path, config.template_id);
      std::size_t with_context = 0;
      for (const auto& r : records) with_context += r.context.has_value();
      for (const auto& r : records) load_template(r.template_id, config.templates_dir);
      std::cout << records.size() << " records, " << with_context << " with context\n";
    } else if (extract_cmd->parsed()) {
      const auto records = ingest(config.dataset_path, config.template_id);
      OracleSet oracles = make_oracles(config, records);
      const ExtractResult result = run_extract(config, oracles, records);
      std::cout << result.rows.size() << " rows written to " << (out_dir / "features.jsonl").string()
                << ", " << result.quarantined.size() << " quarantined\n";
    } else if (train_cmd->parsed()) {
      const fs::path table_path = features_path(config, features);
      const auto table = load_table(table_path);
      const ConfidenceModel m = train_model(config, table);
      fs::create_directories(out_dir);
      save(m, out_dir / "model.json");
      update_manifest(config, "train", {{"features", table_path}}, {{"model.json", out_dir / "model.json"}},
                      {{"lambda", m.lambda_l2}, {"n_train", m.train_meta.n_train}});
      print_ranking(coefficient_report(m));
    } else if (eval_cmd->parsed()) {
      const fs::path table_path = features_path(config, features);
      const auto table = load_table(table_path);
      const EvalOutcome outcome = train_and_eval(config, table);
      fs::create_directories(out_dir);
      save(outcome.model, out_dir / "model.json");
      write_json(out_dir / "report.json", to_json(outcome.report));
      write_scores_csv(out_dir / "scores.csv", outcome.first_run_scores);
      update_manifest(config, "eval", {{"features", table_path}},
                      {{"model.json", out_dir / "model.json"},
                       {"report.json", out_dir / "report.json"},
                       {"scores.csv", out_dir / "scores.csv"}},
                      {{"skipped_splits", outcome.report.skipped_splits}});
      std::cout << format_table(outcome.report);
    } else if (transfer_cmd->parsed()) {
      const EvalReport r = transfer(config, *model, *target);
      fs::create_directories(out_dir);
      write_json(out_dir / "transfer_report.json", to_json(r));
      update_manifest(config, "transfer", {{"model", *model}, {"target", *target}},
                      {{"transfer_report.json", out_dir / "transfer_report.json"}}, json::object());
      std::cout << format_table(r);
    } else if (audit_cmd->parsed()) {
      const auto records = ingest(config.dataset_path, config.template_id);
      OracleSet oracles = make_oracles(config, records);
      const AuditResult audit = audit_entailment(config, records, oracles);
      json j = json::object();
      for (const auto& [kind, frac] : audit.entailed_fraction) {
        j[std::string(to_string(kind))] = {{"entailed_fraction", frac}, {"pairs", audit.pairs.at(kind)}};
        std::printf("%-4s %7.2f%%  (%zu pairs)\n", std::string(to_string(kind)).c_str(), 100.0 * frac,
                    audit.pairs.at(kind));
      }
      fs::create_directories(out_dir);
      write_json(out_dir / "audit.json", j);
      update_manifest(config, "audit-entailment", {{"dataset", config.dataset_path}},
                      {{"audit.json", out_dir / "audit.json"}}, {{"oracle_calls", oracles.call_counts()}});
    } else if (report_cmd->parsed()) {
      const fs::path path = report ? fs::path(*report) : out_dir / "report.json";
      std::ifstream in(path);
      if (!in) throw DataError("cannot open report " + path.string());
      const json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
      if (j.is_discarded()) throw DataError("invalid JSON in " + path.string());
      std::cout << format_table(eval_report_from_json(j));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const QuarantineLimitExceeded& e) {
    std::cerr << "oracle failure: " << e.what() << '\n';
    return kExitOracle;
  } catch (const OracleError& e) {
    std::cerr << "oracle failure: " << e.what() << '\n';
    return kExitOracle;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
