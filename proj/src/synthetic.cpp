#include "llmconf/synthetic.hpp"

#include <array>

#include "llmconf/digest.hpp"
#include "llmconf/errors.hpp"
#include "llmconf/random.hpp"
#include "llmconf/text.hpp"

namespace llmconf {
namespace {

constexpr std::array<std::string_view, 32> kAnswerPool = {
    "France",   "Denmark",  "Iceland", "Norway",   "Sweden",    "Finland",  "Portugal", "Spain",
    "Italy",    "Austria",  "Belgium", "Poland",   "Hungary",   "Greece",   "Ireland",  "Scotland",
    "Wales",    "Egypt",    "Morocco", "Kenya",    "Peru",      "Chile",    "Brazil",   "Mexico",
    "Canada",   "Japan",    "Korea",   "Vietnam",  "Thailand",  "Nepal",    "Mongolia", "Tibet"};

constexpr std::array<std::string_view, 24> kNames = {
    "Rollo",   "Charles", "Aldric",  "Brevia",   "Castora", "Dunmere", "Elowen", "Fenwick",
    "Galbrin", "Halvard", "Isolde",  "Jorvik",   "Kestrel", "Lindqvist", "Marrow", "Norland",
    "Ostrava", "Pellam",  "Quenby",  "Rothgar",  "Sorrel",  "Tavish",  "Ulric",  "Varenna"};

constexpr std::array<std::string_view, 8> kThings = {"harbor", "castle", "library", "bridge",
                                                     "market", "abbey",  "fortress", "mill"};

double hash01(std::uint64_t h) { return static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53; }

std::string wrong_answer(std::uint64_t seed, const PromptRecord& r, std::string_view tag) {
  const auto gold = text::tokenize(r.gold_answers.front());
  Rng rng(derive_seed(derive_seed(seed, r.id), tag));
  for (;;) {
    std::string cand(kAnswerPool[rng.uniform_index(kAnswerPool.size())]);
    if (text::tokenize(cand) != gold) return cand;
  }
}

}  // namespace

SyntheticLlm::SyntheticLlm(SyntheticLlmConfig config, const std::vector<PromptRecord>& records,
                           std::string template_text)
    : config_(std::move(config)), records_(records), template_text_(std::move(template_text)) {
  const auto q = template_text_.find("{question}");
  if (q == std::string::npos) throw ConfigError("synthetic LLM: template has no {question}");
  const auto prev = template_text_.rfind('}', q == 0 ? 0 : q - 1);
  const std::size_t lit_start = (prev == std::string::npos || prev >= q) ? 0 : prev + 1;
  before_question_ = template_text_.substr(lit_start, q - lit_start);
  after_question_ = template_text_.substr(q + std::string_view("{question}").size());
  if (after_question_.find('{') != std::string::npos) {
    throw ConfigError("synthetic LLM: {question} must be the last placeholder");
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    by_prompt_.emplace(render_prompt(records_[i], template_text_), i);
    by_question_.emplace(records_[i].question, i);
  }
}

std::string SyntheticLlm::endpoint_id() const {
  return "mock:" + config_.name + ":" + std::to_string(config_.seed);
}

bool SyntheticLlm::knows(const PromptRecord& record) const {
  return hash01(derive_seed(config_.seed, "knows:" + record.id)) < config_.base_accuracy;
}

std::optional<std::size_t> SyntheticLlm::find_record(std::string_view prompt) const {
  if (auto it = by_prompt_.find(std::string(prompt)); it != by_prompt_.end()) return it->second;
  if (prompt.size() < after_question_.size() ||
      prompt.substr(prompt.size() - after_question_.size()) != after_question_) {
    return std::nullopt;
  }
  const std::string_view head = prompt.substr(0, prompt.size() - after_question_.size());
  const auto pos = before_question_.empty() ? 0 : head.rfind(before_question_);
  if (pos == std::string_view::npos) return std::nullopt;
  const std::string question(head.substr(pos + before_question_.size()));
  if (auto it = by_question_.find(question); it != by_question_.end()) return it->second;
  return std::nullopt;
}

GenerationResult SyntheticLlm::generate(std::string_view prompt, const DecodingConfig& config) {
  count_call();
  if (text::trim(prompt).empty()) throw DataError("generate: empty prompt");
  config.validate();
  const auto idx = find_record(prompt);
  const std::string digest = sha256_hex(prompt);
  if (!idx) {
    // Unknown prompt: a fixed pool answer per prompt.
    Rng rng(derive_seed(config_.seed, digest));
    return {std::string(kAnswerPool[rng.uniform_index(kAnswerPool.size())]), FinishReason::kStop};
  }
  const PromptRecord& r = records_[*idx];
  const bool known = knows(r);
  const std::string primary = known ? r.gold_answers.front() : wrong_answer(config_.seed, r, "w0");

  const bool original = by_prompt_.contains(std::string(prompt));
  if (original && config.mode == DecodingMode::kGreedy) return {primary, FinishReason::kStop};

  const bool flipped = hash01(derive_seed(derive_seed(config_.seed, r.id), digest)) < config_.noise;
  const bool consistent = known != flipped;
  if (consistent) return {primary, FinishReason::kStop};

  std::vector<std::string> candidates = {r.gold_answers.front(), wrong_answer(config_.seed, r, "w0")};
  for (int k = 1; k <= 4; ++k) candidates.push_back(wrong_answer(config_.seed, r, "w" + std::to_string(k)));
  std::uint64_t h = derive_seed(derive_seed(config_.seed, digest), to_string(config.mode));
  h = derive_seed(h, "sample", config.seed);
  Rng rng(h);
  return {candidates[rng.uniform_index(candidates.size())], FinishReason::kStop};
}

std::vector<PromptRecord> make_synthetic_dataset(std::size_t n, std::uint64_t seed,
                                                 const std::string& template_id) {
  std::vector<PromptRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, "record", i));
    auto name = [&] { return std::string(kNames[rng.uniform_index(kNames.size())]); };
    auto thing = [&] { return std::string(kThings[rng.uniform_index(kThings.size())]); };
    const std::string place = name() + "-" + std::to_string(i);
    const std::string answer(kAnswerPool[rng.uniform_index(kAnswerPool.size())]);

    std::vector<std::string> sentences = {
        "The people of " + place + " are known for the old " + thing() + " near " + name() + ".",
        place + " is a small region of " + answer + " that was founded by " + name() + ".",
        "Many of the families who lived there gave their name to the " + thing() + ".",
        "Their leader " + name() + " agreed to swear allegiance to King " + name() + " of the West.",
        "It continued to evolve over the centuries that followed.",
        "During the winter the " + thing() + " of " + name() + " was not open to visitors.",
    };
    // Vary context length and order; always keep at least three sentences.
    rng.shuffle(sentences);
    sentences.resize(3 + rng.uniform_index(4));

    PromptRecord rec;
    rec.id = "syn-" + std::to_string(i);
    rec.context = text::join_sentences(sentences);
    rec.question = "In what country is " + place + " located?";
    rec.gold_answers = {answer};
    rec.template_id = template_id;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace llmconf
