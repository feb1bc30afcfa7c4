#include "llmconf/mock_oracles.hpp"

#include <array>
#include <cctype>
#include <unordered_map>

#include "llmconf/digest.hpp"
#include "llmconf/errors.hpp"
#include "llmconf/random.hpp"
#include "llmconf/text.hpp"

namespace llmconf {
namespace {

constexpr std::array<std::string_view, 24> kMockVocabulary = {
    "paris",  "france",  "london", "river",  "blue",   "seven", "king",   "north",
    "winter", "copper",  "violin", "harbor", "silver", "tiger", "garden", "marble",
    "desert", "lantern", "orchid", "canyon", "comet",  "meadow", "falcon", "glacier"};

const std::unordered_map<std::string, std::string>& synonyms() {
  static const std::unordered_map<std::string, std::string> table = {
      {"good", "fine"},           {"answer", "response"},     {"people", "persons"},
      {"region", "area"},         {"located", "situated"},    {"gave", "lent"},
      {"leader", "chief"},        {"agreed", "consented"},    {"country", "nation"},
      {"large", "big"},           {"small", "little"},        {"began", "started"},
      {"city", "town"},           {"famous", "renowned"},     {"important", "significant"},
      {"gradually", "slowly"},    {"originally", "initially"}, {"emerged", "appeared"},
      {"continued", "went on"},   {"first", "initial"},       {"built", "constructed"},
      {"known", "recognized"},    {"many", "numerous"},       {"often", "frequently"},
      {"house", "home"},          {"big", "large"},           {"quickly", "rapidly"},
      {"near", "close to"},       {"area", "zone"},           {"old", "ancient"},
      {"later", "subsequently"},  {"died", "passed away"},    {"wrote", "authored"},
      {"founded", "established"}, {"lived", "resided"},       {"won", "gained"},
  };
  return table;
}

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string substitute_word(std::string_view word) {
  std::size_t b = 0, e = word.size();
  while (b < e && is_punct(word[b])) ++b;
  while (e > b && is_punct(word[e - 1])) --e;
  std::string core(word.substr(b, e - b));
  std::string lower = core;
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto it = synonyms().find(lower);
  if (it == synonyms().end()) return std::string(word);
  std::string replacement = it->second;
  if (!core.empty() && std::isupper(static_cast<unsigned char>(core[0]))) {
    replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
  }
  return std::string(word.substr(0, b)) + replacement + std::string(word.substr(e));
}

std::string reverse_words(std::string_view text) {
  std::string out;
  for (std::string_view w : text::split_words(text)) {
    if (!out.empty()) out.push_back(' ');
    out.append(w.rbegin(), w.rend());
  }
  return out;
}

}  // namespace

MockGenerator::MockGenerator(std::map<std::string, std::string> answers)
    : answers_(std::move(answers)) {}

GenerationResult MockGenerator::generate(std::string_view prompt, const DecodingConfig& config) {
  count_call();
  if (text::trim(prompt).empty()) throw DataError("generate: empty prompt");
  config.validate();
  if (const auto it = answers_.find(std::string(prompt)); it != answers_.end()) {
    return {it->second, FinishReason::kStop};
  }
  const std::string digest = sha256_hex(prompt);
  std::uint64_t h = fnv1a64(digest);
  h = derive_seed(h, to_string(config.mode));
  if (config.mode == DecodingMode::kNucleus) h = derive_seed(h, "seed", config.seed);
  Rng rng(h);
  const std::size_t words = 1 + rng.uniform_index(3);
  std::string text;
  for (std::size_t i = 0; i < words; ++i) {
    if (i > 0) text.push_back(' ');
    text.append(kMockVocabulary[rng.uniform_index(kMockVocabulary.size())]);
  }
  return {text, FinishReason::kStop};
}

void MockNli::add_contradiction(std::string a, std::string b) {
  contradictions_.emplace(a, b);
  contradictions_.emplace(std::move(b), std::move(a));
}

void MockNli::add_entailment(std::string premise, std::string hypothesis) {
  entailments_.emplace(std::move(premise), std::move(hypothesis));
}

void MockNli::add_equivalence_class(const std::vector<std::string>& members) {
  for (const auto& a : members) {
    for (const auto& b : members) {
      if (a != b) add_entailment(a, b);
    }
  }
}

NliProbs MockNli::nli(std::string_view premise, std::string_view hypothesis) {
  count_call();
  if (text::trim(premise).empty() || text::trim(hypothesis).empty()) {
    throw DataError("nli: premise and hypothesis must be non-empty");
  }
  std::pair<std::string, std::string> key{std::string(premise), std::string(hypothesis)};
  if (premise == hypothesis || entailments_.contains(key)) return {1.0, 0.0, 0.0};
  if (contradictions_.contains(key)) return {0.0, 0.0, 1.0};
  return {0.0, 1.0, 0.0};
}

std::string MockTranslator::translate(std::string_view text, std::string_view source_lang,
                                      std::string_view target_lang) {
  count_call();
  if (text::trim(text).empty()) throw DataError("translate: empty text");
  if (source_lang == target_lang) return std::string(text::trim(text));
  if (source_lang == "en") {
    std::string substituted;
    for (std::string_view w : text::split_words(text)) {
      if (!substituted.empty()) substituted.push_back(' ');
      substituted += substitute_word(w);
    }
    return reverse_words(substituted);
  }
  return reverse_words(text);
}

std::vector<std::size_t> MockEntityDetector::entity_sentence_indices(
    std::span<const std::string> sentences) {
  count_call();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto words = text::split_words(sentences[i]);
    for (std::size_t w = 0; w < words.size(); ++w) {
      std::string_view word = words[w];
      while (!word.empty() && is_punct(word.front())) word.remove_prefix(1);
      if (word.empty() || !std::isupper(static_cast<unsigned char>(word.front()))) continue;
      // The first word is capitalized anyway; it only counts when it is not
      // a function word ("The", "They", "It").
      const auto tokens = text::tokenize(word);
      if (w == 0 && (tokens.empty() || text::StopwordLexicon::english().stopwords().contains(tokens[0]))) {
        continue;
      }
      {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

}  // namespace llmconf
