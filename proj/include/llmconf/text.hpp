#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace llmconf::text {

// Lowercased, punctuation-stripped word tokens. Never contains empty tokens.
using TokenSequence = std::vector<std::string>;

// Non-empty, trimmed sentence spans in source order.
using SentenceList = std::vector<std::string>;

// Function words removed by stopword filtering, with a negation subset that
// is always kept.
class StopwordLexicon {
 public:
  StopwordLexicon(std::unordered_set<std::string> stopwords,
                  std::unordered_set<std::string> negations);

  // Bundled English list (data/stopwords_en.txt, data/negations_en.txt).
  static const StopwordLexicon& english();
  static StopwordLexicon from_files(const std::filesystem::path& stopwords,
                                    const std::filesystem::path& negations);

  bool is_negation(std::string_view token) const;
  // True if the token is removed: a stopword that is not a negation.
  bool removable(std::string_view token) const;

  const std::unordered_set<std::string>& stopwords() const { return stopwords_; }
  const std::unordered_set<std::string>& negations() const { return negations_; }

 private:
  std::unordered_set<std::string> stopwords_;
  std::unordered_set<std::string> negations_;
  bool negation_suffix_ = false;  // "n't" entry: match any token ending in n't
};

class AbbreviationList {
 public:
  explicit AbbreviationList(std::unordered_set<std::string> entries);

  static const AbbreviationList& english();
  static AbbreviationList from_file(const std::filesystem::path& path);

  // `word` is lowercase and ends with '.'.
  bool contains(std::string_view word) const { return entries_.contains(std::string(word)); }

 private:
  std::unordered_set<std::string> entries_;
};

// Parses a one-entry-per-line list; blank lines and '#' comments skipped.
std::unordered_set<std::string> parse_word_list(std::string_view contents);

TokenSequence tokenize(std::string_view text);

SentenceList split_sentences(std::string_view text,
                             const AbbreviationList& abbreviations = AbbreviationList::english());

// Joins sentences with single spaces.
std::string join_sentences(std::span<const std::string> sentences);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// ROUGE-L F1 over token sequences; 0 when either side is empty.
double rouge_l_f1(std::span<const std::string> candidate, std::span<const std::string> reference);
double rouge_l_f1(std::string_view candidate, std::string_view reference);

// Mean ROUGE-L F1 over all unordered pairs. Throws InapplicableFeature for
// fewer than two responses.
double mean_pairwise_rouge(std::span<const std::string> responses);

// Drops every word whose token is a removable stopword. Surviving words keep
// their original casing and punctuation and are joined by single spaces.
std::string remove_stopwords(std::string_view text,
                             const StopwordLexicon& lexicon = StopwordLexicon::english());

// Whitespace-delimited words, untouched.
std::vector<std::string_view> split_words(std::string_view text);

std::string_view trim(std::string_view s);

}  // namespace llmconf::text
