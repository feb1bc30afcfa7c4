#include "llmconf/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "llmconf/digest.hpp"
#include "llmconf/errors.hpp"
#include "llmconf/featurizer.hpp"
#include "llmconf/http_oracles.hpp"
#include "llmconf/mock_oracles.hpp"
#include "llmconf/random.hpp"
#include "llmconf/response_cache.hpp"
#include "llmconf/synthetic.hpp"
#include "llmconf/text.hpp"

namespace llmconf {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(std::string("cannot open ") + what + ": " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

HttpEndpoint endpoint_from_spec(const OracleSpec& spec, const std::string& role) {
  HttpEndpoint ep;
  if (!spec.contains("url")) throw ConfigError(role + ": http oracle needs a url");
  ep.base_url = spec.at("url").get<std::string>();
  ep.timeout = std::chrono::milliseconds(spec.value("timeout_ms", 60000));
  ep.max_attempts = spec.value("max_attempts", 3);
  std::string env = spec.value("auth_env", std::string{});
  if (env.empty()) {
    env = "LLMCONF_" + role + "_TOKEN";
    for (char& c : env) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  if (const char* token = std::getenv(env.c_str())) ep.auth_token = token;
  return ep;
}

std::string spec_kind(const OracleSpec& spec, const std::string& role) {
  if (!spec.is_object() || !spec.contains("kind")) {
    throw ConfigError(role + ": oracle spec needs a \"kind\"");
  }
  return spec.at("kind").get<std::string>();
}

std::shared_ptr<Generator> make_generator(const RunConfig& config,
                                          const std::vector<PromptRecord>& records) {
  const auto& spec = config.generator;
  const std::string kind = spec_kind(spec, "generator");
  if (kind == "mock") {
    return std::make_shared<MockGenerator>(
        spec.value("answers", json::object()).get<std::map<std::string, std::string>>());
  }
  if (kind == "synthetic") {
    SyntheticLlmConfig sc;
    sc.base_accuracy = spec.value("base_accuracy", sc.base_accuracy);
    sc.noise = spec.value("noise", sc.noise);
    sc.seed = spec.value("seed", sc.seed);
    sc.name = spec.value("name", sc.name);
    return std::make_shared<SyntheticLlm>(sc, records,
                                          load_template(config.template_id, config.templates_dir));
  }
  if (kind == "http") return std::make_shared<HttpGenerator>(endpoint_from_spec(spec, "generator"));
  if (kind == "chat") {
    return std::make_shared<ChatCompletionsGenerator>(endpoint_from_spec(spec, "generator"),
                                                      spec.value("model", std::string{}));
  }
  throw ConfigError("generator: unknown kind " + kind);
}

std::shared_ptr<NliScorer> make_nli(const OracleSpec& spec) {
  const std::string kind = spec_kind(spec, "nli");
  if (kind == "mock") {
    auto mock = std::make_shared<MockNli>();
    for (const auto& p : spec.value("contradictions", json::array())) {
      mock->add_contradiction(p.at(0).get<std::string>(), p.at(1).get<std::string>());
    }
    for (const auto& p : spec.value("entailments", json::array())) {
      mock->add_entailment(p.at(0).get<std::string>(), p.at(1).get<std::string>());
    }
    return mock;
  }
  if (kind == "http") return std::make_shared<HttpNli>(endpoint_from_spec(spec, "nli"));
  throw ConfigError("nli: unknown kind " + kind);
}

std::shared_ptr<Translator> make_translator(const OracleSpec& spec) {
  const std::string kind = spec_kind(spec, "translator");
  if (kind == "mock") return std::make_shared<MockTranslator>();
  if (kind == "http") return std::make_shared<HttpTranslator>(endpoint_from_spec(spec, "translator"));
  throw ConfigError("translator: unknown kind " + kind);
}

std::shared_ptr<EntityDetector> make_ner(const OracleSpec& spec) {
  const std::string kind = spec_kind(spec, "ner");
  if (kind == "mock") return std::make_shared<MockEntityDetector>();
  if (kind == "http") return std::make_shared<HttpEntityDetector>(endpoint_from_spec(spec, "ner"));
  throw ConfigError("ner: unknown kind " + kind);
}

PlanOptions plan_options(const RunConfig& config, std::uint64_t record_seed) {
  PlanOptions o;
  o.generations = config.generations;
  o.seed = record_seed;
  o.sampling = config.sampling;
  o.pivot_language = config.pivot_language;
  return o;
}

std::uint64_t record_seed(const RunConfig& config, const PromptRecord& record) {
  return derive_seed(config.seed, "record:" + record.id);
}

RunEvalOptions eval_options(const RunConfig& config) {
  RunEvalOptions o;
  o.train_size = config.train_size;
  o.runs = config.runs;
  o.seed = derive_seed(config.seed, "eval");
  o.lambda_grid = config.lambda_grid;
  return o;
}

}  // namespace

// ---------------------------------------------------------------- RunConfig

void RunConfig::validate() const {
  if (strategies.empty()) throw ConfigError("at least one strategy must be enabled");
  if (strategies.contains(StrategyKind::kSD) && generations < 3) {
    throw ConfigError("generations must be >= 3 when SD is enabled");
  }
  if (generations < 2) throw ConfigError("generations must be >= 2");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must be in [0,1]");
  if (train_size < 2) throw ConfigError("train_size must be >= 2");
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (lambda_grid.empty()) throw ConfigError("lambda_grid must not be empty");
  for (double l : lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("lambda values must be >= 0");
  }
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (max_splits < 1) throw ConfigError("max_splits must be >= 1");
  if (!(quarantine_threshold >= 0.0 && quarantine_threshold <= 1.0)) {
    throw ConfigError("quarantine_threshold must be in [0,1]");
  }
  if (!(sampling.top_p > 0.0 && sampling.top_p <= 1.0)) throw ConfigError("top_p must be in (0,1]");
  if (!(sampling.temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (sampling.beam_width < 1) throw ConfigError("beam_width must be positive");
  if (sampling.max_tokens < 1) throw ConfigError("max_tokens must be positive");
}

json RunConfig::to_json() const {
  std::vector<std::string> strat;
  for (StrategyKind k : kAllStrategies) {
    if (strategies.contains(k)) strat.emplace_back(to_string(k));
  }
  return {{"dataset_path", dataset_path},
          {"template_id", template_id},
          {"templates_dir", templates_dir},
          {"generator", generator},
          {"nli", nli},
          {"translator", translator},
          {"ner", ner},
          {"sampling",
           {{"top_p", sampling.top_p},
            {"temperature", sampling.temperature},
            {"beam_width", sampling.beam_width},
            {"max_tokens", sampling.max_tokens}}},
          {"pivot_language", pivot_language},
          {"strategies", strat},
          {"generations", generations},
          {"max_splits", max_splits},
          {"theta", theta},
          {"train_size", train_size},
          {"runs", runs},
          {"seed", seed},
          {"lambda_grid", lambda_grid},
          {"cache_dir", cache_dir},
          {"output_dir", output_dir},
          {"workers", workers},
          {"quarantine_threshold", quarantine_threshold}};
}

RunConfig RunConfig::from_json(const json& j) {
  static const std::set<std::string> kKnown = {
      "dataset_path", "template_id", "templates_dir", "generator",  "nli",
      "translator",   "ner",         "sampling",      "pivot_language", "strategies",
      "generations",  "max_splits",  "theta",         "train_size", "runs",
      "seed",         "lambda_grid", "cache_dir",     "output_dir", "workers",
      "quarantine_threshold"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kKnown.contains(key)) throw ConfigError("unknown config key: " + key);
  }
  RunConfig c;
  try {
    c.dataset_path = j.value("dataset_path", c.dataset_path);
    c.template_id = j.value("template_id", c.template_id);
    c.templates_dir = j.value("templates_dir", c.templates_dir);
    if (j.contains("generator")) c.generator = j.at("generator");
    if (j.contains("nli")) c.nli = j.at("nli");
    if (j.contains("translator")) c.translator = j.at("translator");
    if (j.contains("ner")) c.ner = j.at("ner");
    if (j.contains("sampling")) {
      const auto& s = j.at("sampling");
      c.sampling.top_p = s.value("top_p", c.sampling.top_p);
      c.sampling.temperature = s.value("temperature", c.sampling.temperature);
      c.sampling.beam_width = s.value("beam_width", c.sampling.beam_width);
      c.sampling.max_tokens = s.value("max_tokens", c.sampling.max_tokens);
    }
    c.pivot_language = j.value("pivot_language", c.pivot_language);
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j.at("strategies")) c.strategies.insert(strategy_from_string(s.get<std::string>()));
    }
    c.generations = j.value("generations", c.generations);
    c.max_splits = j.value("max_splits", c.max_splits);
    c.theta = j.value("theta", c.theta);
    c.train_size = j.value("train_size", c.train_size);
    c.runs = j.value("runs", c.runs);
    c.seed = j.value("seed", c.seed);
    if (j.contains("lambda_grid")) c.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    c.cache_dir = j.value("cache_dir", c.cache_dir);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.workers = j.value("workers", c.workers);
    c.quarantine_threshold = j.value("quarantine_threshold", c.quarantine_threshold);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const fs::path& path) {
  const std::string contents = read_text(path, "config");
  auto j = json::parse(contents, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ConfigError("config: invalid JSON in " + path.string());
  return from_json(j);
}

std::string RunConfig::digest() const { return sha256_hex(to_json().dump()); }

// ------------------------------------------------------------------- ingest

std::vector<PromptRecord> ingest(const fs::path& path, const std::string& default_template_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path.string());
  std::vector<PromptRecord> records;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) fail("not a JSON object");
    PromptRecord r;
    try {
      if (!j.contains("id") || !j["id"].is_string()) fail("missing string field \"id\"");
      if (!j.contains("question") || !j["question"].is_string()) fail("missing string field \"question\"");
      if (!j.contains("gold_answers") || !j["gold_answers"].is_array()) {
        fail("missing array field \"gold_answers\"");
      }
      r.id = j["id"].get<std::string>();
      r.question = j["question"].get<std::string>();
      r.gold_answers = j["gold_answers"].get<std::vector<std::string>>();
      if (j.contains("context") && !j["context"].is_null()) {
        if (!j["context"].is_string()) fail("\"context\" must be a string");
        r.context = j["context"].get<std::string>();
        if (text::trim(*r.context).empty()) r.context.reset();
      }
      r.template_id = j.value("template_id", default_template_id);
    } catch (const json::exception& e) {
      fail(e.what());
    }
    try {
      r.validate();
    } catch (const DataError& e) {
      fail(e.what());
    }
    if (!ids.insert(r.id).second) fail("duplicate record id " + r.id);
    records.push_back(std::move(r));
  }
  if (records.empty()) throw DataError("dataset " + path.string() + " has no records");
  return records;
}

std::string load_template(const std::string& template_id, const std::string& templates_dir) {
  if (template_id == "synthetic") return std::string(kSyntheticTemplate);
  std::string t = read_text(fs::path(templates_dir) / (template_id + ".txt"), "template");
  if (!t.empty() && t.back() == '\n') t.pop_back();
  if (!t.empty() && t.back() == '\r') t.pop_back();
  if (t.find("{question}") == std::string::npos) {
    throw ConfigError("template " + template_id + " has no {question} placeholder");
  }
  return t;
}

// ------------------------------------------------------------------ oracles

json OracleSet::call_counts() const {
  auto entry = [](const std::shared_ptr<Oracle>& front, const std::shared_ptr<Oracle>& backend) {
    return json{{"requests", front ? front->calls() : 0},
                {"backend_calls", backend ? backend->calls() : 0},
                {"endpoint", backend ? backend->endpoint_id() : std::string{}}};
  };
  return {{"generator", entry(generator, generator_backend)},
          {"nli", entry(nli, nli_backend)},
          {"translator", entry(translator, translator_backend)},
          {"ner", entry(ner, ner_backend)}};
}

OracleSet wrap_oracles(const RunConfig& config, std::shared_ptr<Generator> generator,
                       std::shared_ptr<NliScorer> nli, std::shared_ptr<Translator> translator,
                       std::shared_ptr<EntityDetector> ner) {
  OracleSet set;
  set.generator_backend = generator;
  set.nli_backend = nli;
  set.translator_backend = translator;
  set.ner_backend = ner;
  if (config.cache_dir.empty()) {
    set.generator = std::move(generator);
    set.nli = std::move(nli);
    set.translator = std::move(translator);
    set.ner = std::move(ner);
  } else {
    auto cache = std::make_shared<const ResponseCache>(config.cache_dir);
    set.generator = std::make_shared<CachingGenerator>(std::move(generator), cache);
    set.nli = std::make_shared<CachingNli>(std::move(nli), cache);
    set.translator = std::make_shared<CachingTranslator>(std::move(translator), cache);
    set.ner = std::make_shared<CachingEntityDetector>(std::move(ner), cache);
  }
  return set;
}

OracleSet make_oracles(const RunConfig& config, const std::vector<PromptRecord>& records) {
  try {
    return wrap_oracles(config, make_generator(config, records), make_nli(config.nli),
                        make_translator(config.translator), make_ner(config.ner));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("oracle spec: ") + e.what());
  }
}

// ------------------------------------------------------------------ extract

LabeledExample process_record(const PromptRecord& record, const std::string& template_text,
                              const RunConfig& config, OracleSet& oracles) {
  const std::uint64_t seed = record_seed(config, record);
  const PlanOptions options = plan_options(config, seed);

  const std::string prompt = render_prompt(record, template_text);
  const GenerationResult primary =
      oracles.generator->generate(prompt, DecodingConfig::greedy(config.sampling.max_tokens));

  LabeledExample ex;
  const LabelResult lab = label(primary.text, record.gold_answers, LabelConfig{"rouge-l-f1", config.theta});
  ex.label = lab.label;
  ex.match_score = lab.match_score;
  ex.provenance.primary_response = primary.text;

  std::map<StrategyKind, StrategyFeatures> per_strategy;
  for (std::size_t s = 0; s < kAllStrategies.size(); ++s) {
    const StrategyKind kind = kAllStrategies[s];
    if (!config.strategies.contains(kind)) {
      per_strategy[kind] = StrategyFeatures{0.0, 0.0, false};
      continue;
    }
    if (kind == StrategyKind::kSRC) {
      const PerturbationPlan plan = plan_src(primary.text);
      StrategyFeatures f{0.0, 0.0, plan.applicable};
      if (plan.applicable) {
        f.sets_or_value = src_feature(primary.text, *oracles.nli, config.max_splits,
                                      derive_seed(seed, "SRC")).value;
      }
      per_strategy[kind] = f;
      continue;
    }

    PerturbationPlan plan;
    switch (kind) {
      case StrategyKind::kSD: plan = plan_sd(record, template_text, options); break;
      case StrategyKind::kPP: plan = plan_pp(record, template_text, *oracles.translator, options); break;
      case StrategyKind::kSP: plan = plan_sp(record, template_text, *oracles.ner, options); break;
      case StrategyKind::kEFA: plan = plan_efa(record, template_text, *oracles.ner, options); break;
      case StrategyKind::kSR: plan = plan_sr(record, template_text, options); break;
      case StrategyKind::kSRC: break;
    }
    ResponseSet set;
    set.strategy = kind;
    set.question = record.question;
    for (const auto& v : plan.variants) {
      set.responses.push_back(oracles.generator->generate(v.prompt_text, v.decoding).text);
    }
    ex.provenance.noop_fallback[s] = plan.noop_fallback;
    ex.provenance.generations[s] = static_cast<int>(set.responses.size());
    per_strategy[kind] = StrategyFeatures{
        static_cast<double>(count_semantic_sets(set, *oracles.nli)),
        lexical_similarity_feature(set), true};
  }
  ex.features = assemble(record.id, per_strategy);
  return ex;
}

ExtractResult extract(const RunConfig& config, const std::vector<PromptRecord>& records,
                      OracleSet& oracles) {
  config.validate();
  std::map<std::string, std::string> templates;
  for (const auto& r : records) {
    if (!templates.contains(r.template_id)) {
      templates[r.template_id] = load_template(r.template_id, config.templates_dir);
    }
  }

  std::vector<std::optional<LabeledExample>> rows(records.size());
  std::vector<std::string> errors(records.size());
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= records.size()) return;
      {
        std::lock_guard lock(fatal_mutex);
        if (fatal) return;
      }
      try {
        rows[i] = process_record(records[i], templates.at(records[i].template_id), config, oracles);
      } catch (const OracleError& e) {
        errors[i] = e.what();
      } catch (const DataError& e) {
        errors[i] = e.what();
      } catch (const InapplicableFeature& e) {
        errors[i] = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        return;
      }
    }
  };

  const auto n_workers = static_cast<std::size_t>(std::max(1, config.workers));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(n_workers, records.size()); ++w) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  ExtractResult result;
  for (StrategyKind k : kAllStrategies) result.noop_counts[k] = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (rows[i]) {
      for (std::size_t s = 0; s < kAllStrategies.size(); ++s) {
        if (rows[i]->provenance.noop_fallback[s]) ++result.noop_counts[kAllStrategies[s]];
      }
      result.rows.push_back(std::move(*rows[i]));
    } else {
      result.quarantined.push_back({records[i].id, errors[i]});
    }
  }
  return result;
}

ExtractResult run_extract(const RunConfig& config, OracleSet& oracles,
                          const std::vector<PromptRecord>& records) {
  ExtractResult result = extract(config, records, oracles);
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);
  const fs::path features = out_dir / "features.jsonl";
  const fs::path csv = out_dir / "features.csv";
  const fs::path errors = out_dir / "errors.jsonl";
  write_jsonl(features, result.rows);
  write_csv(csv, result.rows);
  {
    std::ofstream out(errors, std::ios::binary | std::ios::trunc);
    for (const auto& q : result.quarantined) {
      out << json{{"record_id", q.record_id}, {"error", q.error}}.dump() << '\n';
    }
  }
  json noop = json::object();
  for (const auto& [k, n] : result.noop_counts) noop[std::string(to_string(k))] = n;
  update_manifest(config, "extract", {{"dataset", config.dataset_path}},
                  {{"features.jsonl", features}, {"features.csv", csv}, {"errors.jsonl", errors}},
                  {{"records", records.size()},
                   {"rows", result.rows.size()},
                   {"quarantined", result.quarantined.size()},
                   {"noop_fallback_counts", noop},
                   {"oracle_calls", oracles.call_counts()}});

  const double share = records.empty() ? 0.0
                                       : static_cast<double>(result.quarantined.size()) /
                                             static_cast<double>(records.size());
  if (share > config.quarantine_threshold) {
    throw QuarantineLimitExceeded(std::to_string(result.quarantined.size()) + " of " +
                                  std::to_string(records.size()) +
                                  " records failed on oracle calls; see " + errors.string());
  }
  return result;
}

// ------------------------------------------------------- train / eval / transfer

ConfidenceModel train_model(const RunConfig& config, std::span<const LabeledExample> table) {
  const RunEvalOptions options = eval_options(config);
  std::vector<LabeledExample> train(table.begin(), table.end());
  const std::uint64_t split_seed = derive_seed(config.seed, "train-split");
  Rng rng(split_seed);
  rng.shuffle(train);
  if (train.size() > config.train_size) train.resize(config.train_size);
  RunEvalOptions inner = options;
  inner.seed = split_seed;
  const double lambda = select_lambda(train, inner);
  return fit(train, lambda, split_seed);
}

EvalOutcome train_and_eval(const RunConfig& config, std::span<const LabeledExample> table) {
  EvalOutcome outcome = run_eval(table, eval_options(config));
  outcome.report.config_digest = config.digest();
  return outcome;
}

EvalReport transfer(const RunConfig& config, const fs::path& source_model_path,
                    const fs::path& target_table_path) {
  const ConfidenceModel model = load(source_model_path);
  const auto target = read_jsonl(target_table_path);
  EvalReport report = transfer_eval(model, target);
  report.config_digest = config.digest();
  return report;
}

// -------------------------------------------------------------------- audit

AuditResult audit_entailment(const RunConfig& config, const std::vector<PromptRecord>& records,
                             OracleSet& oracles) {
  std::map<StrategyKind, std::vector<std::pair<std::string, std::string>>> pairs;
  std::map<std::string, std::string> templates;
  for (const auto& r : records) {
    if (!templates.contains(r.template_id)) {
      templates[r.template_id] = load_template(r.template_id, config.templates_dir);
    }
    const std::string& tmpl = templates[r.template_id];
    const std::string original = render_prompt(r, tmpl);
    const PlanOptions options = plan_options(config, record_seed(config, r));
    for (StrategyKind kind : {StrategyKind::kPP, StrategyKind::kSP, StrategyKind::kEFA,
                              StrategyKind::kSR}) {
      if (!config.strategies.contains(kind)) continue;
      PerturbationPlan plan;
      switch (kind) {
        case StrategyKind::kPP: plan = plan_pp(r, tmpl, *oracles.translator, options); break;
        case StrategyKind::kSP: plan = plan_sp(r, tmpl, *oracles.ner, options); break;
        case StrategyKind::kEFA: plan = plan_efa(r, tmpl, *oracles.ner, options); break;
        default: plan = plan_sr(r, tmpl, options); break;
      }
      pairs[kind].emplace_back(original, plan.variants.front().prompt_text);
    }
  }
  AuditResult result;
  for (const auto& [kind, p] : pairs) {
    result.entailed_fraction[kind] = entailment_audit(p, *oracles.nli);
    result.pairs[kind] = p.size();
  }
  return result;
}

// ----------------------------------------------------------------- manifest

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void update_manifest(const RunConfig& config, const std::string& stage,
                     const std::map<std::string, fs::path>& inputs,
                     const std::map<std::string, fs::path>& outputs, const json& extra) {
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);
  const fs::path path = out_dir / "manifest.json";
  json manifest = json::object();
  if (std::ifstream in(path); in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    auto parsed = json::parse(ss.str(), nullptr, /*allow_exceptions=*/false);
    if (!parsed.is_discarded() && parsed.is_object()) manifest = std::move(parsed);
  }
  json in_digests = json::object();
  for (const auto& [name, p] : inputs) {
    in_digests[name] = {{"path", p.string()}, {"sha256", file_digest(p)}};
  }
  json out_digests = json::object();
  for (const auto& [name, p] : outputs) {
    out_digests[name] = {{"path", p.string()}, {"sha256", file_digest(p)}};
  }
  json entry = {{"config_digest", config.digest()},
                {"timestamp", utc_timestamp()},
                {"inputs", in_digests},
                {"outputs", out_digests}};
  for (const auto& [k, v] : extra.items()) entry[k] = v;
  manifest["config"] = config.to_json();
  manifest["config_digest"] = config.digest();
  manifest["stages"][stage] = entry;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << '\n';
}

}  // namespace llmconf
