#include <doctest.h>

#include <algorithm>

#include "llmconf/errors.hpp"
#include "llmconf/mock_oracles.hpp"
#include "llmconf/perturbation.hpp"
#include "llmconf/text.hpp"

using namespace llmconf;

namespace {

constexpr std::string_view kSplitTemplate = "{context}||{question}";

const char* kNormans =
    "The Normans (Norman : Nourmands ; French : Normands ; Latin : Normanni) are the people who, "
    "in the 10th and 11th centuries, gave their name to Normandy, a region of France. They "
    "descended from the Normands (\"Norman\" comes from \"Norseman\") of the raiders and pirates of "
    "Denmark, Iceland and Norway who, under their leader Rollo, agreed to swear allegiance to King "
    "Charles III of France of the West. During generations of assimilation and mixing with the "
    "native French and Roman-Gaulese populations, their descendants would gradually merge with the "
    "Carolingian cultures of West France. The distinct cultural and ethnic identity of the Normans "
    "originally emerged in the first half of the 10th century, and it continued to evolve over the "
    "centuries that followed.";

PromptRecord normans() {
  return {"norm", std::string(kNormans), "In what country is Normandy located?", {"France"}, "t"};
}

std::string context_of(const std::string& prompt) { return prompt.substr(0, prompt.find("||")); }
std::string question_of(const std::string& prompt) { return prompt.substr(prompt.find("||") + 2); }

// Translator whose round trip is the identity.
class EchoTranslator final : public Translator {
 public:
  std::string translate(std::string_view text, std::string_view, std::string_view) override {
    count_call();
    return std::string(text);
  }
  std::string endpoint_id() const override { return "echo"; }
};

// Ten sentences; entities in all but indices 1, 4, 8.
std::vector<std::string> seven_entity_sentences() {
  return {"Alpha went north.", "it was cold.",     "Bravo stayed home.", "Charlie left early.",
          "nothing happened.", "Delta came back.", "Echo wrote a book.", "Foxtrot sang.",
          "the end came.",     "Golf slept."};
}

void check_totals(const PerturbationPlan& p) {
  CHECK(static_cast<int>(p.variants.size()) == p.target_generation_count);
}

}  // namespace

TEST_CASE("render_prompt") {
  PromptRecord r{"q", std::nullopt, "who?", {"me"}, "t"};
  CHECK(render_prompt(r, "Q: {question}\nA:") == "Q: who?\nA:");
  CHECK_THROWS_AS(render_prompt(r, "context: {context} {question}"), ConfigError);
  CHECK_THROWS_AS(render_prompt(r, "{question} {answer}"), ConfigError);
  // Braces that are not placeholders pass through.
  CHECK(render_prompt(r, "{ {question} }") == "{ who? }");

  const auto p = render_prompt(normans(), "context: {context}\nquestion: {question}");
  CHECK(p.rfind("context: The Normans", 0) == 0);
  CHECK(p.find("\nquestion: In what country is Normandy located?") != std::string::npos);
}

TEST_CASE("perturbation target prefers the context") {
  CHECK(perturbation_target(normans()) == kNormans);
  PromptRecord q{"q", std::nullopt, "Who wrote Hamlet?", {"Shakespeare"}, "t"};
  CHECK(perturbation_target(q) == "Who wrote Hamlet?");
  CHECK(with_target(q, "x").question == "x");
  CHECK(*with_target(normans(), "y").context == "y");
}

TEST_CASE("sampling diversity plan") {
  PlanOptions o;
  o.seed = 9;
  const auto r = normans();
  const auto p5 = plan_sd(r, kSplitTemplate, o);
  REQUIRE(p5.variants.size() == 5);
  CHECK(p5.variants[0].decoding.mode == DecodingMode::kGreedy);
  CHECK(p5.variants[1].decoding.mode == DecodingMode::kBeam);
  std::set<std::uint64_t> seeds;
  for (int i = 2; i < 5; ++i) {
    CHECK(p5.variants[i].decoding.mode == DecodingMode::kNucleus);
    seeds.insert(p5.variants[i].decoding.seed);
  }
  CHECK(seeds.size() == 3);
  for (const auto& v : p5.variants) CHECK(v.prompt_text == render_prompt(r, kSplitTemplate));
  check_totals(p5);

  o.generations = 3;
  const auto p3 = plan_sd(r, kSplitTemplate, o);
  REQUIRE(p3.variants.size() == 3);
  CHECK(p3.variants[2].decoding.mode == DecodingMode::kNucleus);
  o.generations = 2;
  CHECK_THROWS_AS(plan_sd(r, kSplitTemplate, o), ConfigError);
}

TEST_CASE("paraphrasing plan") {
  PlanOptions o;
  MockTranslator tr;
  const auto r = normans();
  const auto p = plan_pp(r, kSplitTemplate, tr, o);
  check_totals(p);
  REQUIRE(p.variants.size() == 5);
  CHECK_FALSE(p.noop_fallback);
  CHECK(context_of(p.variants[0].prompt_text) != kNormans);
  for (const auto& v : p.variants) {
    CHECK(v.prompt_text == p.variants[0].prompt_text);
    CHECK(v.decoding.mode == DecodingMode::kNucleus);
    CHECK(question_of(v.prompt_text) == r.question);
  }
  CHECK(tr.calls() == 2);

  EchoTranslator echo;
  const auto noop = plan_pp(r, kSplitTemplate, echo, o);
  CHECK(noop.noop_fallback);
  check_totals(noop);
  CHECK(noop.variants[0].prompt_text == render_prompt(r, kSplitTemplate));
}

TEST_CASE("sentence permutation with seven entity sentences") {
  const auto s = seven_entity_sentences();
  MockEntityDetector ner;
  const auto entities = ner.entity_sentence_indices(s);
  REQUIRE(entities == std::vector<std::size_t>{0, 2, 3, 5, 6, 7, 9});
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto out = permute_entity_sentences(s, entities, seed);
    REQUIRE(out.size() == s.size());
    auto a = out, b = s;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    std::size_t moved = 0, entity_fixed = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool is_entity = std::find(entities.begin(), entities.end(), i) != entities.end();
      if (!is_entity) CHECK(out[i] == s[i]);
      if (out[i] != s[i]) ++moved;
      else if (is_entity) ++entity_fixed;
    }
    CHECK(moved >= 2);
    CHECK(moved <= 5);
    CHECK(entity_fixed >= 2);
  }
}

TEST_CASE("sentence permutation of few entity sentences is never the identity") {
  const std::vector<std::string> s = {"Alpha one.", "Bravo two."};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CHECK(permute_entity_sentences(s, {0, 1}, seed) == std::vector<std::string>{"Bravo two.", "Alpha one."});
  }
  CHECK_THROWS(permute_entity_sentences(s, {0}, 1));
}

TEST_CASE("sentence permutation plan") {
  PlanOptions o;
  o.seed = 3;
  MockEntityDetector ner;
  const auto r = normans();
  const auto p = plan_sp(r, kSplitTemplate, ner, o);
  check_totals(p);
  CHECK_FALSE(p.noop_fallback);
  for (const auto& v : p.variants) {
    CHECK(v.decoding.mode == DecodingMode::kGreedy);
    CHECK(question_of(v.prompt_text) == r.question);
    CHECK(context_of(v.prompt_text) != kNormans);
  }
  CHECK(p.variants[0].prompt_text == plan_sp(r, kSplitTemplate, ner, o).variants[0].prompt_text);

  PromptRecord q{"q", std::nullopt, "Who wrote Hamlet?", {"Shakespeare"}, "t"};
  const auto noop = plan_sp(q, "{question}", ner, o);
  CHECK(noop.noop_fallback);
  check_totals(noop);
  for (const auto& v : noop.variants) {
    CHECK(v.prompt_text == "Who wrote Hamlet?");
    CHECK(v.decoding.mode == DecodingMode::kNucleus);
  }
}

TEST_CASE("entity frequency amplification") {
  const auto s = seven_entity_sentences();
  const std::vector<std::size_t> entities = {0, 2, 3, 5, 6, 7, 9};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto out = amplify_entity_sentence(s, entities, seed);
    REQUIRE(out.size() == s.size() + 2);
    // Find the tripled sentence and check the rest is the original order.
    std::size_t at = out.size();
    for (std::size_t i = 0; i + 2 < out.size(); ++i) {
      if (out[i] == out[i + 1] && out[i] == out[i + 2]) at = i;
    }
    REQUIRE(at < out.size());
    CHECK(std::find(entities.begin(), entities.end(), at) != entities.end());
    auto rest = out;
    rest.erase(rest.begin() + static_cast<long>(at), rest.begin() + static_cast<long>(at) + 2);
    CHECK(rest == s);
  }

  PlanOptions o;
  MockEntityDetector ner;
  const auto r = normans();
  const auto p = plan_efa(r, kSplitTemplate, ner, o);
  check_totals(p);
  for (const auto& v : p.variants) {
    const auto sentences = text::split_sentences(context_of(v.prompt_text));
    CHECK(sentences.size() == text::split_sentences(kNormans).size() + 2);
    CHECK(question_of(v.prompt_text) == r.question);
  }
  PromptRecord none{"n", std::string("the sky is blue. it rains."), "why?", {"x"}, "t"};
  const auto noop = plan_efa(none, kSplitTemplate, ner, o);
  CHECK(noop.noop_fallback);
  check_totals(noop);
}

TEST_CASE("stopword removal plan") {
  PlanOptions o;
  const auto r = normans();
  const auto p = plan_sr(r, kSplitTemplate, o);
  check_totals(p);
  CHECK_FALSE(p.noop_fallback);
  const std::string ctx = context_of(p.variants[0].prompt_text);
  const auto in = text::tokenize(kNormans), out = text::tokenize(ctx);
  CHECK(out.size() < in.size());
  // Output tokens are a subsequence of the input tokens.
  std::size_t j = 0;
  for (const auto& t : in) {
    if (j < out.size() && out[j] == t) ++j;
  }
  CHECK(j == out.size());
  for (const char* w : {"are", "to"}) {
    CHECK(std::find(out.begin(), out.end(), w) == out.end());
  }
  CHECK(question_of(p.variants[0].prompt_text) == r.question);

  PromptRecord no_stop{"n", std::nullopt, "Hamlet author?", {"x"}, "t"};
  CHECK(plan_sr(no_stop, "{question}", o).noop_fallback);
  PromptRecord neg{"n", std::nullopt, "not good", {"x"}, "t"};
  CHECK(plan_sr(neg, "{question}", o).variants[0].prompt_text == "not good");
}

TEST_CASE("response self-consistency plan") {
  CHECK_FALSE(plan_src("Normandy is in France.").applicable);
  CHECK(plan_src("Normandy is in Denmark. Normandy is in Iceland.").applicable);
  CHECK_FALSE(plan_src("").applicable);
  const auto p = plan_src("A is B. C is D.");
  CHECK(p.variants.empty());
  check_totals(p);
}

TEST_CASE("plans are reproducible and seed-sensitive") {
  PlanOptions a, b;
  a.seed = 1;
  b.seed = 2;
  MockEntityDetector ner;
  const auto r = normans();
  CHECK(plan_sd(r, kSplitTemplate, a).variants[2].decoding.seed ==
        plan_sd(r, kSplitTemplate, a).variants[2].decoding.seed);
  CHECK(plan_sd(r, kSplitTemplate, a).variants[2].decoding.seed !=
        plan_sd(r, kSplitTemplate, b).variants[2].decoding.seed);
  std::set<std::string> prompts;
  for (const auto& v : plan_sp(r, kSplitTemplate, ner, a).variants) prompts.insert(v.prompt_text);
  CHECK(prompts.size() > 1);
}
