#include "llmconf/perturbation.hpp"

#include <algorithm>
#include <cctype>

#include "llmconf/errors.hpp"
#include "llmconf/random.hpp"
#include "llmconf/text.hpp"

namespace llmconf {
namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

DecodingConfig nucleus(const PlanOptions& o, std::string_view stream, std::size_t index) {
  return DecodingConfig::nucleus(o.sampling.top_p, o.sampling.temperature,
                                 derive_seed(o.seed, stream, index), o.sampling.max_tokens);
}

// n nucleus samples of one prompt, seeds drawn from the strategy's stream.
void add_sampled(PerturbationPlan& plan, const std::string& prompt, const PlanOptions& o) {
  const std::string stream = std::string(to_string(plan.strategy)) + ".nucleus";
  for (int i = 0; i < o.generations; ++i) {
    plan.variants.push_back({prompt, nucleus(o, stream, static_cast<std::size_t>(i))});
  }
}

void require_generations(const PlanOptions& o, int minimum, StrategyKind kind) {
  if (o.generations < minimum) {
    throw ConfigError(std::string(to_string(kind)) + ": needs at least " + std::to_string(minimum) +
                      " generations, got " + std::to_string(o.generations));
  }
}

PerturbationPlan make_plan(StrategyKind kind, const PlanOptions& o) {
  PerturbationPlan plan;
  plan.strategy = kind;
  plan.target_generation_count = o.generations;
  return plan;
}

// Shared body of SP and EFA: n independently perturbed prompts, one greedy
// generation each, or the sampling fallback when nothing can change.
template <typename Perturb>
PerturbationPlan plan_sentence_perturbation(StrategyKind kind, const PromptRecord& record,
                                            std::string_view template_text, EntityDetector& ner,
                                            const PlanOptions& o, std::size_t min_entities,
                                            Perturb perturb) {
  require_generations(o, 1, kind);
  PerturbationPlan plan = make_plan(kind, o);
  const std::vector<std::string> sentences = text::split_sentences(perturbation_target(record));
  const std::vector<std::size_t> entities =
      sentences.empty() ? std::vector<std::size_t>{} : ner.entity_sentence_indices(sentences);
  if (entities.size() < min_entities) {
    plan.noop_fallback = true;
    add_sampled(plan, render_prompt(record, template_text), o);
    return plan;
  }
  const std::string stream(to_string(kind));
  for (int i = 0; i < o.generations; ++i) {
    const auto perturbed =
        perturb(sentences, entities, derive_seed(o.seed, stream, static_cast<std::size_t>(i)));
    plan.variants.push_back(
        {render_prompt(with_target(record, text::join_sentences(perturbed)), template_text),
         DecodingConfig::greedy(o.sampling.max_tokens)});
  }
  return plan;
}

}  // namespace

void PromptRecord::validate() const {
  if (text::trim(question).empty()) throw DataError("record " + id + ": empty question");
  if (gold_answers.empty()) throw DataError("record " + id + ": no gold answers");
  for (const auto& a : gold_answers) {
    if (text::trim(a).empty()) throw DataError("record " + id + ": empty gold answer");
  }
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kSD: return "SD";
    case StrategyKind::kPP: return "PP";
    case StrategyKind::kSP: return "SP";
    case StrategyKind::kEFA: return "EFA";
    case StrategyKind::kSR: return "SR";
    case StrategyKind::kSRC: return "SRC";
  }
  return "SD";
}

StrategyKind strategy_from_string(std::string_view s) {
  for (StrategyKind k : kAllStrategies) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown strategy: " + std::string(s));
}

std::string render_prompt(const PromptRecord& record, std::string_view template_text) {
  std::string out;
  out.reserve(template_text.size() + record.question.size() +
              (record.context ? record.context->size() : 0));
  std::size_t i = 0;
  while (i < template_text.size()) {
    const char c = template_text[i];
    if (c == '{' && i + 1 < template_text.size() && is_ident_start(template_text[i + 1])) {
      std::size_t j = i + 1;
      while (j < template_text.size() && is_ident_char(template_text[j])) ++j;
      if (j < template_text.size() && template_text[j] == '}') {
        const std::string_view name = template_text.substr(i + 1, j - i - 1);
        if (name == "question") {
          out += record.question;
        } else if (name == "context") {
          if (!record.context) {
            throw ConfigError("template uses {context} but record " + record.id + " has none");
          }
          out += *record.context;
        } else {
          throw ConfigError("unresolved template placeholder {" + std::string(name) + "}");
        }
        i = j + 1;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

const std::string& perturbation_target(const PromptRecord& record) {
  return record.context ? *record.context : record.question;
}

PromptRecord with_target(const PromptRecord& record, std::string new_target) {
  PromptRecord out = record;
  if (out.context) {
    out.context = std::move(new_target);
  } else {
    out.question = std::move(new_target);
  }
  return out;
}

PerturbationPlan plan_sd(const PromptRecord& record, std::string_view template_text,
                         const PlanOptions& o) {
  require_generations(o, 3, StrategyKind::kSD);
  PerturbationPlan plan = make_plan(StrategyKind::kSD, o);
  const std::string prompt = render_prompt(record, template_text);
  plan.variants.push_back({prompt, DecodingConfig::greedy(o.sampling.max_tokens)});
  plan.variants.push_back({prompt, DecodingConfig::beam(o.sampling.beam_width, o.sampling.max_tokens)});
  for (int i = 0; i < o.generations - 2; ++i) {
    plan.variants.push_back({prompt, nucleus(o, "SD.nucleus", static_cast<std::size_t>(i))});
  }
  return plan;
}

PerturbationPlan plan_pp(const PromptRecord& record, std::string_view template_text,
                         Translator& translator, const PlanOptions& o) {
  require_generations(o, 1, StrategyKind::kPP);
  PerturbationPlan plan = make_plan(StrategyKind::kPP, o);
  const std::string& target = perturbation_target(record);
  const std::string pivot = translator.translate(target, "en", o.pivot_language);
  std::string back = translator.translate(pivot, o.pivot_language, "en");
  if (text::trim(back) == text::trim(target) || text::trim(back).empty()) {
    plan.noop_fallback = true;
    add_sampled(plan, render_prompt(record, template_text), o);
  } else {
    add_sampled(plan, render_prompt(with_target(record, std::move(back)), template_text), o);
  }
  return plan;
}

std::vector<std::string> permute_entity_sentences(const std::vector<std::string>& sentences,
                                                  const std::vector<std::size_t>& entity_indices,
                                                  std::uint64_t seed, std::size_t max_reordered) {
  if (entity_indices.size() < 2 || max_reordered < 2) {
    throw Error("permute_entity_sentences: need at least 2 sentences to reorder");
  }
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  if (entity_indices.size() <= max_reordered) {
    chosen = entity_indices;
  } else {
    for (std::size_t k : rng.sample_without_replacement(entity_indices.size(), max_reordered)) {
      chosen.push_back(entity_indices[k]);
    }
    std::sort(chosen.begin(), chosen.end());
  }

  std::vector<std::size_t> order(chosen.size());
  const auto identity = [&] {
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (order[k] != k) return false;
    }
    return true;
  };
  // Rejection sampling keeps the draw uniform over non-identity permutations.
  do {
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    rng.shuffle(order);
  } while (identity());

  std::vector<std::string> out = sentences;
  for (std::size_t k = 0; k < chosen.size(); ++k) out[chosen[k]] = sentences[chosen[order[k]]];
  return out;
}

std::vector<std::string> amplify_entity_sentence(const std::vector<std::string>& sentences,
                                                 const std::vector<std::size_t>& entity_indices,
                                                 std::uint64_t seed, int copies) {
  if (entity_indices.empty()) throw Error("amplify_entity_sentence: no entity sentences");
  Rng rng(seed);
  const std::size_t pick = entity_indices[rng.uniform_index(entity_indices.size())];
  std::vector<std::string> out;
  out.reserve(sentences.size() + static_cast<std::size_t>(copies));
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const int times = i == pick ? copies : 1;
    for (int t = 0; t < times; ++t) out.push_back(sentences[i]);
  }
  return out;
}

PerturbationPlan plan_sp(const PromptRecord& record, std::string_view template_text,
                         EntityDetector& ner, const PlanOptions& o) {
  return plan_sentence_perturbation(
      StrategyKind::kSP, record, template_text, ner, o, 2,
      [](const auto& sentences, const auto& entities, std::uint64_t seed) {
        return permute_entity_sentences(sentences, entities, seed);
      });
}

PerturbationPlan plan_efa(const PromptRecord& record, std::string_view template_text,
                          EntityDetector& ner, const PlanOptions& o) {
  return plan_sentence_perturbation(
      StrategyKind::kEFA, record, template_text, ner, o, 1,
      [](const auto& sentences, const auto& entities, std::uint64_t seed) {
        return amplify_entity_sentence(sentences, entities, seed);
      });
}

PerturbationPlan plan_sr(const PromptRecord& record, std::string_view template_text,
                         const PlanOptions& o) {
  require_generations(o, 1, StrategyKind::kSR);
  PerturbationPlan plan = make_plan(StrategyKind::kSR, o);
  const std::string& target = perturbation_target(record);
  std::string stripped = text::remove_stopwords(target);
  const bool unchanged = text::split_words(stripped).size() == text::split_words(target).size();
  if (unchanged || text::trim(stripped).empty()) {
    plan.noop_fallback = true;
    add_sampled(plan, render_prompt(record, template_text), o);
  } else {
    add_sampled(plan, render_prompt(with_target(record, std::move(stripped)), template_text), o);
  }
  return plan;
}

PerturbationPlan plan_src(std::string_view primary_response) {
  PerturbationPlan plan;
  plan.strategy = StrategyKind::kSRC;
  plan.target_generation_count = 0;
  plan.applicable = text::split_sentences(primary_response).size() >= 2;
  return plan;
}

}  // namespace llmconf
