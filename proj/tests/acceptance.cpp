// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Runs entirely on mocks.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "llmconf/confidence_model.hpp"
#include "llmconf/evaluation.hpp"
#include "llmconf/featurizer.hpp"
#include "llmconf/mock_oracles.hpp"
#include "llmconf/perturbation.hpp"
#include "llmconf/pipeline.hpp"
#include "llmconf/random.hpp"
#include "llmconf/synthetic.hpp"
#include "llmconf/text.hpp"
#include "oracle_logistic.hpp"
#include "reference.hpp"
#include "test_support.hpp"

using namespace llmconf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failure messages for a criterion.
class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass_ = false;
    if (++failures_ <= 3) msg_ += (msg_.empty() ? "" : "; ") + what;
  }
  Outcome done(const std::string& summary) const {
    return {pass_, pass_ ? summary : msg_ + (failures_ > 3 ? " (+" + std::to_string(failures_ - 3) + " more)" : "")};
  }

 private:
  bool pass_ = true;
  int failures_ = 0;
  std::string msg_;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ------------------------------------------------------------------ ROUGE

Outcome rouge_oracle() {
  Check c;
  Rng rng(101);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::string> x(rng.uniform_index(13)), y(rng.uniform_index(13));
    for (auto& w : x) w = vocab[rng.uniform_index(vocab.size())];
    for (auto& w : y) w = vocab[rng.uniform_index(vocab.size())];
    const double err = std::abs(text::rouge_l_f1(x, y) - reference::rouge_l_f1(x, y));
    worst = std::max(worst, err);
    c.require(err <= 1e-12, "pair " + std::to_string(t) + " differs by " + fmt("%.3g", err));
  }
  return c.done("1000 pairs, max |diff| " + fmt("%.1e", worst));
}

// ----------------------------------------------------------- semantic sets

class MatrixNli final : public NliScorer {
 public:
  explicit MatrixNli(std::vector<std::vector<bool>> e) : e_(std::move(e)) {}
  NliProbs nli(std::string_view p, std::string_view h) override {
    count_call();
    const auto a = std::stoul(std::string(p.substr(1))), b = std::stoul(std::string(h.substr(1)));
    return e_[a][b] ? NliProbs{0.9, 0.05, 0.05} : NliProbs{0.1, 0.6, 0.3};
  }
  std::string endpoint_id() const override { return "matrix"; }

 private:
  std::vector<std::vector<bool>> e_;
};

Outcome semantic_sets() {
  Check c;
  Rng rng(202);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + rng.uniform_index(5);
    const double density = rng.uniform01();
    std::vector<std::vector<bool>> e(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) e[i][j] = i == j || rng.uniform01() < density;
    ResponseSet set;
    for (std::size_t i = 0; i < n; ++i) set.responses.push_back("r" + std::to_string(i));
    MatrixNli nli(e);
    const auto got = count_semantic_sets(set, nli);
    const auto want = reference::closure_components(e);
    c.require(got == want, "graph " + std::to_string(t) + ": " + std::to_string(got) + " vs " + std::to_string(want));
  }
  MockNli nli;
  nli.add_equivalence_class({"excellent", "great", "fantastic"});
  nli.add_equivalence_class({"bad", "subpar"});
  ResponseSet worked{StrategyKind::kSD, {"excellent", "great", "bad", "subpar", "fantastic"}, ""};
  const auto sets = count_semantic_sets(worked, nli);
  c.require(sets == 2, "worked example gave " + std::to_string(sets));
  return c.done("500 graphs exact; worked example -> 2 sets");
}

// ----------------------------------------------------------------- metrics

std::vector<ScoredExample> scored(const std::vector<double>& conf, const std::vector<int>& y) {
  std::vector<ScoredExample> out;
  for (std::size_t i = 0; i < conf.size(); ++i) out.push_back({"r" + std::to_string(i), conf[i], y[i]});
  return out;
}

Outcome metrics_oracle() {
  Check c;
  Rng rng(303);
  int done = 0;
  while (done < 200) {
    const std::size_t n = 2 + rng.uniform_index(7);
    std::vector<double> conf(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      conf[i] = rng.uniform01() < 0.5 ? double(rng.uniform_index(11)) / 10.0 : rng.uniform01();
      y[i] = rng.uniform01() < 0.5;
    }
    if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0) continue;
    const auto s = scored(conf, y);
    c.require(std::abs(auroc(s) - reference::auroc(s)) <= 1e-12, "auroc instance " + std::to_string(done));
    c.require(std::abs(auarc(s) - reference::auarc(s)) <= 1e-12, "auarc instance " + std::to_string(done));
    c.require(std::abs(ece(s, 10) - reference::ece(s, 10)) <= 1e-12, "ece instance " + std::to_string(done));
    ++done;
  }
  c.require(std::abs(auroc(scored({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1})) - 0.75) <= 1e-12, "AUROC 0.75 case");
  c.require(std::abs(auarc(scored({0.9, 0.1}, {1, 0})) - 0.75) <= 1e-12, "AUARC 0.75 case");
  c.require(std::abs(auarc(scored({0.1, 0.9}, {1, 0})) - 0.25) <= 1e-12, "AUARC 0.25 case");
  c.require(std::abs(ece(scored({0.05, 0.05, 0.05, 0.05, 0.95, 0.95, 0.95, 0.95},
                                {0, 0, 0, 0, 1, 1, 1, 1})) - 0.05) <= 1e-12,
            "ECE 0.05 case");
  return c.done("200 instances + 4 fixed examples exact to 1e-12");
}

// --------------------------------------------------------------- optimizer

struct Draw {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Draw draw_logistic(std::size_t n, const std::vector<double>& w, double b, std::uint64_t seed) {
  Rng rng(seed);
  Draw d{Eigen::MatrixXd(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(w.size())),
         Eigen::VectorXd(static_cast<Eigen::Index>(n))};
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    double z = b;
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
      d.x(i, j) = 1.0 + 2.0 * rng.normal();
      z += w[static_cast<std::size_t>(j)] * d.x(i, j);
    }
    d.y(i) = rng.uniform01() < 1.0 / (1.0 + std::exp(-z)) ? 1.0 : 0.0;
  }
  return d;
}

Outcome optimizer() {
  Check c;
  const std::vector<double> w_star = {0.8, -0.5, 0.3};
  const double b_star = -0.4;

  // Finite differences at 20 random points.
  const Draw small = draw_logistic(500, w_star, b_star, 404);
  LogisticObjective obj(small.x, small.y, 0.01);
  Rng rng(405);
  double worst_rel = 0;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd p(4);
    for (int k = 0; k < 4; ++k) p(k) = rng.normal();
    const Eigen::VectorXd g = obj.gradient(p);
    Eigen::VectorXd fd(4);
    const double h = 1e-6;
    for (int k = 0; k < 4; ++k) {
      Eigen::VectorXd a = p, b = p;
      a(k) += h;
      b(k) -= h;
      fd(k) = (obj.value(a) - obj.value(b)) / (2 * h);
    }
    const double rel = (fd - g).norm() / std::max(g.norm(), 1e-12);
    worst_rel = std::max(worst_rel, rel);
    c.require(rel < 1e-5, "FD relative error " + fmt("%.2e", rel));
  }

  // Recovery of known parameters.
  const Draw train = draw_logistic(5000, w_star, b_star, 406);
  const auto names = std::vector<std::string>{"x1", "x2", "x3"};
  const ConfidenceModel m = fit_matrix(train.x, train.y, names, 1e-4, 0);
  c.require(m.train_meta.converged, "solver did not converge");
  double b_raw = m.intercept;
  double worst_param = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    const double w_raw = m.weights[j] / m.stats.stddev[j];
    b_raw -= w_raw * m.stats.mean[j];
    worst_param = std::max(worst_param, std::abs(w_raw - w_star[j]));
    c.require(std::abs(w_raw - w_star[j]) <= 0.1, "w" + std::to_string(j) + " off by " + fmt("%.3f", w_raw - w_star[j]));
  }
  worst_param = std::max(worst_param, std::abs(b_raw - b_star));
  c.require(std::abs(b_raw - b_star) <= 0.1, "intercept off by " + fmt("%.3f", b_raw - b_star));

  // Agreement with the independent gradient-descent reference (standardized space).
  const Eigen::MatrixXd z = m.stats.apply(train.x);
  oracle::Matrix rows(5000, std::vector<double>(3));
  std::vector<double> y(5000);
  for (int i = 0; i < 5000; ++i) {
    for (int j = 0; j < 3; ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = z(i, j);
    y[static_cast<std::size_t>(i)] = train.y(i);
  }
  const auto ref = oracle::fit(rows, y, 1e-4, 3000, 2.0);
  for (std::size_t j = 0; j < 3; ++j) {
    c.require(std::abs(ref[j] - m.weights[j]) < 1e-4, "reference optimizer disagrees on w" + std::to_string(j));
  }
  c.require(std::abs(ref[3] - m.intercept) < 1e-4, "reference optimizer disagrees on intercept");

  // Calibration on held-out draws from the same model.
  const Draw test = draw_logistic(5000, w_star, b_star, 407);
  std::vector<ScoredExample> s;
  for (Eigen::Index i = 0; i < test.x.rows(); ++i) {
    const std::vector<double> row = {test.x(i, 0), test.x(i, 1), test.x(i, 2)};
    s.push_back({std::to_string(i), m.predict_proba(row), static_cast<int>(test.y(i))});
  }
  const double e = ece(s);
  c.require(e < 0.03, "held-out ECE " + fmt("%.4f", e));
  return c.done("FD max rel err " + fmt("%.1e", worst_rel) + ", max param err " + fmt("%.3f", worst_param) +
                ", held-out ECE " + fmt("%.4f", e));
}

// ---------------------------------------------------- perturbation invariants

std::string random_sentence(Rng& rng) {
  static const std::vector<std::string> names = {"Rollo", "Paris", "Normandy", "Charles", "Denmark",
                                                 "Iceland", "Norway", "France", "Latin", "Gaul"};
  static const std::vector<std::string> words = {"the", "people", "of", "river", "not", "a", "to",
                                                 "gave", "their", "name", "with", "never", "old",
                                                 "region", "is", "no", "cannot", "over", "and", "it"};
  static const std::vector<std::string> starts = {"The", "They", "It", "During", "Many", "Their"};
  std::string s = starts[rng.uniform_index(starts.size())];
  const std::size_t len = 3 + rng.uniform_index(8);
  const bool entity = rng.uniform01() < 0.6;
  const std::size_t entity_at = 1 + rng.uniform_index(len);
  for (std::size_t i = 1; i <= len; ++i) {
    s += " " + (entity && i == entity_at ? names[rng.uniform_index(names.size())]
                                        : words[rng.uniform_index(words.size())]);
  }
  // Sentences never end on a listed abbreviation such as "no.".
  static const std::vector<std::string> endings = {"today", "region", "river", "people", "Paris"};
  return s + " " + endings[rng.uniform_index(endings.size())] + ".";
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

bool is_subsequence(const std::vector<std::string>& sub, const std::vector<std::string>& full) {
  std::size_t j = 0;
  for (const auto& t : full) {
    if (j < sub.size() && sub[j] == t) ++j;
  }
  return j == sub.size();
}

Outcome perturbation_invariants() {
  Check c;
  Rng rng(505);
  MockEntityDetector ner;
  MockTranslator tr;
  const std::string tmpl = "{context}||{question}";
  const auto context_of = [](const std::string& p) { return p.substr(0, p.find("||")); };
  const auto& lex = text::StopwordLexicon::english();
  std::size_t sp_noop = 0, efa_noop = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> sentences;
    const std::size_t n_sent = 2 + rng.uniform_index(9);
    for (std::size_t i = 0; i < n_sent; ++i) sentences.push_back(random_sentence(rng));
    const std::string context = text::join_sentences(sentences);
    if (text::split_sentences(context) != sentences) {
      c.require(false, "context " + std::to_string(t) + " does not re-split");
      continue;
    }
    PromptRecord r{"r" + std::to_string(t), context, "Where is it?", {"France"}, "t"};
    PlanOptions o;
    o.seed = rng.next();
    o.generations = 3 + static_cast<int>(rng.uniform_index(5));
    const auto n = static_cast<std::size_t>(o.generations);
    const auto entities = ner.entity_sentence_indices(sentences);

    const auto sd = plan_sd(r, tmpl, o);
    const auto pp = plan_pp(r, tmpl, tr, o);
    const auto sp = plan_sp(r, tmpl, ner, o);
    const auto efa = plan_efa(r, tmpl, ner, o);
    const auto sr = plan_sr(r, tmpl, o);
    for (const auto* p : {&sd, &pp, &sp, &efa, &sr}) {
      c.require(p->variants.size() == n && p->target_generation_count == o.generations,
                std::string(to_string(p->strategy)) + " totals " + std::to_string(p->variants.size()) +
                    " generations, expected " + std::to_string(n));
    }

    sp_noop += sp.noop_fallback;
    c.require(sp.noop_fallback == (entities.size() < 2), "SP fallback mismatch at " + std::to_string(t));
    for (const auto& v : sp.variants) {
      const auto out = text::split_sentences(context_of(v.prompt_text));
      c.require(sorted(out) == sorted(sentences), "SP output is not a permutation at " + std::to_string(t));
      if (!sp.noop_fallback) c.require(out != sentences, "SP output unchanged at " + std::to_string(t));
    }

    efa_noop += efa.noop_fallback;
    c.require(efa.noop_fallback == entities.empty(), "EFA fallback mismatch at " + std::to_string(t));
    for (const auto& v : efa.variants) {
      const auto out = text::split_sentences(context_of(v.prompt_text));
      if (efa.noop_fallback) {
        c.require(out == sentences, "EFA fallback altered the prompt");
        continue;
      }
      // Exactly one entity sentence gained two copies.
      bool found = false;
      for (std::size_t e : entities) {
        auto expected = sentences;
        expected.push_back(sentences[e]);
        expected.push_back(sentences[e]);
        if (sorted(expected) == sorted(out)) found = true;
      }
      c.require(found, "EFA multiset wrong at " + std::to_string(t));
    }

    const auto in_tokens = text::tokenize(context);
    for (const auto& v : sr.variants) {
      const auto out_tokens = text::tokenize(context_of(v.prompt_text));
      c.require(is_subsequence(out_tokens, in_tokens), "SR output not a subsequence at " + std::to_string(t));
      for (const auto& tok : in_tokens) {
        if (!lex.is_negation(tok)) continue;
        c.require(std::count(out_tokens.begin(), out_tokens.end(), tok) ==
                      std::count(in_tokens.begin(), in_tokens.end(), tok),
                  "SR dropped negation '" + tok + "'");
      }
    }
  }
  return c.done("200 contexts; SP fallbacks " + std::to_string(sp_noop) + ", EFA fallbacks " +
                std::to_string(efa_noop));
}

// --------------------------------------------------------- synthetic runs

RunConfig synthetic_config(const fs::path& out, double base_accuracy, std::uint64_t llm_seed) {
  RunConfig c;
  c.generator = {{"kind", "synthetic"}, {"base_accuracy", base_accuracy}, {"noise", 0.1},
                 {"seed", llm_seed}, {"name", "synthetic"}};
  c.output_dir = out.string();
  c.seed = 2024;
  return c;
}

std::vector<LabeledExample> extract_rows(const RunConfig& c, const std::vector<PromptRecord>& records) {
  OracleSet o = make_oracles(c, records);
  return extract(c, records, o).rows;
}

std::vector<LabeledExample> sd_only(std::vector<LabeledExample> rows) {
  for (auto& r : rows) {
    for (std::size_t s = 2; s < kFeatureCount; ++s) r.features.values[s] = neutral_default(s);
  }
  return rows;
}

Outcome end_to_end() {
  Check c;
  TempDir dir("accept-e2e");
  const auto records = make_synthetic_dataset(2000, 11);
  RunConfig cfg = synthetic_config(dir.path(), 0.7, 1);
  cfg.train_size = 500;
  cfg.runs = 5;
  const auto rows = extract_rows(cfg, records);
  c.require(rows.size() == 2000, "extracted " + std::to_string(rows.size()) + " rows");
  const auto full = train_and_eval(cfg, rows);
  const auto sd = train_and_eval(cfg, sd_only(rows));
  const auto& r = full.report;
  c.require(r.n_eval >= 1500, "held-out size " + std::to_string(r.n_eval));
  c.require(r.auroc >= 0.90, "AUROC " + fmt("%.4f", r.auroc));
  c.require(r.ece <= 0.05, "ECE " + fmt("%.4f", r.ece));
  c.require(r.auroc - sd.report.auroc >= 0.03,
            "margin over SD-only " + fmt("%.4f", r.auroc - sd.report.auroc));

  // Same root seed, same report.
  const auto again = train_and_eval(cfg, extract_rows(cfg, records));
  c.require(to_json(again.report).dump() == to_json(r).dump(), "report not deterministic");
  return c.done("AUROC " + fmt("%.4f", r.auroc) + ", ECE " + fmt("%.4f", r.ece) + ", SD-only AUROC " +
                fmt("%.4f", sd.report.auroc) + ", n_eval " + std::to_string(r.n_eval));
}

Outcome transfer_criterion() {
  Check c;
  TempDir dir("accept-transfer");
  const auto records_a = make_synthetic_dataset(2000, 21);
  const auto records_b = make_synthetic_dataset(2000, 22);
  RunConfig cfg_a = synthetic_config(dir / "a", 0.7, 31);
  RunConfig cfg_b = synthetic_config(dir / "b", 0.5, 32);
  cfg_a.train_size = cfg_b.train_size = 500;
  cfg_a.runs = cfg_b.runs = 1;
  const auto rows_a = extract_rows(cfg_a, records_a);
  const auto rows_b = extract_rows(cfg_b, records_b);

  const auto model_a = train_and_eval(cfg_a, rows_a).model;
  const auto self_b = train_and_eval(cfg_b, rows_b);
  std::map<std::string, const LabeledExample*> by_id;
  for (const auto& r : rows_b) by_id[r.record_id()] = &r;
  std::vector<LabeledExample> held_out_b;
  for (const auto& s : self_b.first_run_scores) held_out_b.push_back(*by_id.at(s.record_id));
  const auto t = transfer_eval(model_a, held_out_b);
  const double loss = self_b.report.auroc - t.auroc;
  c.require(loss <= 0.05, "AUROC loss " + fmt("%.4f", loss));
  return c.done("B self AUROC " + fmt("%.4f", self_b.report.auroc) + ", A->B AUROC " + fmt("%.4f", t.auroc) +
                ", loss " + fmt("%.4f", loss));
}

Outcome protocol_fidelity() {
  Check c;
  TempDir dir("accept-protocol");
  const auto records = make_synthetic_dataset(1600, 41);
  RunConfig cfg = synthetic_config(dir.path(), 0.7, 2);
  c.require(cfg.generations == 5 && cfg.train_size == 1000 && cfg.runs == 5 && cfg.strategies.size() == 6,
            "defaults differ from the protocol");
  const auto rows = extract_rows(cfg, records);
  const auto out = train_and_eval(cfg, rows);
  const auto& r = out.report;
  c.require(r.runs == 5 && r.per_run.size() == 5, "expected 5 runs");
  std::set<std::uint64_t> seeds;
  for (const auto& run : r.per_run) seeds.insert(run.split_seed);
  c.require(seeds.size() == 5, "split seeds not distinct");

  const auto check_stat = [&](const char* name, double mean, double std,
                              const std::function<double(const RunRecord&)>& get) {
    double m = 0;
    for (const auto& run : r.per_run) m += get(run);
    m /= 5;
    double ss = 0;
    for (const auto& run : r.per_run) ss += (get(run) - m) * (get(run) - m);
    c.require(std::abs(mean - m) <= 1e-12, std::string(name) + " mean mismatch");
    c.require(std::abs(std - std::sqrt(ss / 4)) <= 1e-12, std::string(name) + " is not the sample std");
  };
  check_stat("AUROC", r.auroc, r.std_auroc, [](const RunRecord& x) { return x.metrics.auroc; });
  check_stat("AUARC", r.auarc, r.std_auarc, [](const RunRecord& x) { return x.metrics.auarc; });
  check_stat("ECE", r.ece, r.std_ece, [](const RunRecord& x) { return x.metrics.ece; });

  // Ranking: exactly the weights above 1e-4, by descending magnitude.
  std::vector<std::pair<std::string, double>> expected;
  for (std::size_t j = 0; j < out.model.weights.size(); ++j) {
    if (std::abs(out.model.weights[j]) > 1e-4) expected.emplace_back(out.model.feature_names[j], out.model.weights[j]);
  }
  std::stable_sort(expected.begin(), expected.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.second) > std::abs(b.second); });
  c.require(r.coefficient_ranking == expected, "coefficient ranking mismatch");

  const auto j = to_json(r);
  for (const char* key : {"auroc", "auarc", "ece", "std_auroc", "std_auarc", "std_ece", "coefficient_ranking"}) {
    c.require(j.contains(key), std::string("report JSON lacks ") + key);
  }
  return c.done("5 runs, AUROC " + fmt("%.4f", r.auroc) + " +- " + fmt("%.4f", r.std_auroc) + ", " +
                std::to_string(r.coefficient_ranking.size()) + " ranked coefficients");
}

Outcome cache_idempotence() {
  Check c;
  TempDir dir("accept-cache");
  const auto records = make_synthetic_dataset(200, 51);
  RunConfig cfg = synthetic_config(dir / "out", 0.7, 3);
  cfg.cache_dir = (dir / "cache").string();
  OracleSet first = make_oracles(cfg, records);
  run_extract(cfg, first, records);
  const std::string rows1 = slurp(dir / "out" / "features.jsonl");
  c.require(first.generator_backend->calls() > 0, "first run made no generator calls");

  OracleSet second = make_oracles(cfg, records);
  run_extract(cfg, second, records);
  const std::uint64_t calls = second.generator_backend->calls() + second.nli_backend->calls() +
                              second.translator_backend->calls() + second.ner_backend->calls();
  c.require(calls == 0, std::to_string(calls) + " oracle calls on warm cache");
  c.require(slurp(dir / "out" / "features.jsonl") == rows1, "feature rows differ");
  return c.done("cold run " + std::to_string(first.generator_backend->calls() + first.nli_backend->calls() +
                                            first.translator_backend->calls() + first.ner_backend->calls()) +
                " oracle calls, warm run 0, rows byte-identical");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"rouge-oracle-equivalence", 5, rouge_oracle},
      {"semantic-set-correctness", 5, semantic_sets},
      {"metric-oracle-equivalence", 5, metrics_oracle},
      {"optimizer-correctness", 30, optimizer},
      {"perturbation-invariants", 10, perturbation_invariants},
      {"synthetic-end-to-end", 120, end_to_end},
      {"synthetic-transfer", 120, transfer_criterion},
      {"protocol-fidelity", 120, protocol_fidelity},
      {"cache-idempotence", 60, cache_idempotence},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > cr.budget_s) {
      o.pass = false;
      o.detail += " [over " + fmt("%.0f", cr.budget_s) + " s budget]";
    }
    failed += !o.pass;
    std::printf("%s %-26s %6.2fs  %s\n", o.pass ? "PASS" : "FAIL", cr.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
