#include "llmconf/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "embedded_data.hpp"
#include "llmconf/errors.hpp"

namespace llmconf::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open word list: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Replaces U+2019 (right single quote) with an ASCII apostrophe so that
// "didn’t" and "didn't" tokenize the same.
std::string normalize_apostrophes(std::string_view s) {
  static constexpr std::string_view kRsquo = "\xE2\x80\x99";
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s.substr(i, 3) == kRsquo) {
      out.push_back('\'');
      i += 3;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

std::string word_token(std::string_view word) {
  std::size_t b = 0, e = word.size();
  while (b < e && is_punct(word[b])) ++b;
  while (e > b && is_punct(word[e - 1])) --e;
  return lowercase(word.substr(b, e - b));
}

constexpr std::string_view kClosers = "\"')]}";
constexpr std::string_view kOpeners = "\"'([{";

}  // namespace

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

std::unordered_set<std::string> parse_word_list(std::string_view contents) {
  std::unordered_set<std::string> out;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    const std::string_view line = trim(contents.substr(pos, nl - pos));
    if (!line.empty() && line.front() != '#') out.insert(normalize_apostrophes(line));
    pos = nl + 1;
  }
  return out;
}

StopwordLexicon::StopwordLexicon(std::unordered_set<std::string> stopwords,
                                 std::unordered_set<std::string> negations)
    : stopwords_(std::move(stopwords)), negations_(std::move(negations)) {
  negation_suffix_ = negations_.contains("n't");
}

const StopwordLexicon& StopwordLexicon::english() {
  static const StopwordLexicon lexicon(parse_word_list(embedded::kStopwordsEn),
                                       parse_word_list(embedded::kNegationsEn));
  return lexicon;
}

StopwordLexicon StopwordLexicon::from_files(const std::filesystem::path& stopwords,
                                            const std::filesystem::path& negations) {
  return StopwordLexicon(parse_word_list(read_file(stopwords)),
                         parse_word_list(read_file(negations)));
}

bool StopwordLexicon::is_negation(std::string_view token) const {
  if (negations_.contains(std::string(token))) return true;
  return negation_suffix_ && token.size() >= 3 && token.substr(token.size() - 3) == "n't";
}

bool StopwordLexicon::removable(std::string_view token) const {
  return stopwords_.contains(std::string(token)) && !is_negation(token);
}

AbbreviationList::AbbreviationList(std::unordered_set<std::string> entries)
    : entries_(std::move(entries)) {}

const AbbreviationList& AbbreviationList::english() {
  static const AbbreviationList list(parse_word_list(embedded::kAbbreviationsEn));
  return list;
}

AbbreviationList AbbreviationList::from_file(const std::filesystem::path& path) {
  return AbbreviationList(parse_word_list(read_file(path)));
}

TokenSequence tokenize(std::string_view text) {
  const std::string normalized = normalize_apostrophes(text);
  TokenSequence tokens;
  for (std::string_view word : split_words(normalized)) {
    std::string tok = word_token(word);
    if (!tok.empty()) tokens.push_back(std::move(tok));
  }
  return tokens;
}

namespace {
bool is_initial(std::string_view word) {
  return word.size() == 2 && is_upper(word[0]) && word[1] == '.';
}
}  // namespace

SentenceList split_sentences(std::string_view text, const AbbreviationList& abbreviations) {
  SentenceList sentences;
  auto emit = [&](std::size_t b, std::size_t e) {
    const std::string_view s = trim(text.substr(b, e - b));
    if (!s.empty()) sentences.emplace_back(s);
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
    while (j < text.size() && kClosers.find(text[j]) != std::string_view::npos) ++j;

    bool boundary = false;
    if (j == text.size()) {
      boundary = true;
    } else if (is_space(text[j])) {
      std::size_t k = j;
      while (k < text.size() && is_space(text[k])) ++k;
      if (k == text.size()) {
        boundary = true;
      } else {
        char next = text[k];
        if (kOpeners.find(next) != std::string_view::npos && k + 1 < text.size()) {
          next = text[k + 1];
        }
        boundary = is_upper(next);
      }
    }

    if (boundary && c == '.' && text[j - 1] == '.') {
      // Word ending at the period, e.g. "Dr." or "(c.".
      std::size_t w = i;
      while (w > 0 && !is_space(text[w - 1])) --w;
      std::string_view word = text.substr(w, i + 1 - w);
      while (!word.empty() && kOpeners.find(word.front()) != std::string_view::npos) {
        word.remove_prefix(1);
      }
      // A lone capital ("B.") only counts as an initial inside a run of
      // initials ("J. R. Tolkien") or after a title ("Prof. J. Smith"); otherwise it may end a sentence.
      bool initial = false;
      if (is_initial(word)) {
        std::size_t pe = w;
        while (pe > 0 && is_space(text[pe - 1])) --pe;
        std::size_t pb = pe;
        while (pb > 0 && !is_space(text[pb - 1])) --pb;
        std::size_t nb = j;
        while (nb < text.size() && is_space(text[nb])) ++nb;
        std::size_t ne = nb;
        while (ne < text.size() && !is_space(text[ne])) ++ne;
        const std::string_view prev = text.substr(pb, pe - pb);
        initial = is_initial(prev) || abbreviations.contains(lowercase(prev)) ||
                  is_initial(text.substr(nb, ne - nb));
      }
      if (initial || abbreviations.contains(lowercase(word))) boundary = false;
    }

    if (boundary) {
      emit(start, j);
      start = j;
    }
    i = j;
  }
  if (start < text.size()) emit(start, text.size());
  return sentences;
}

std::string join_sentences(std::span<const std::string> sentences) {
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += sentences[i];
  }
  return out;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_f1(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double precision = lcs / static_cast<double>(candidate.size());
  const double recall = lcs / static_cast<double>(reference.size());
  return 2.0 * precision * recall / (precision + recall);
}

double rouge_l_f1(std::string_view candidate, std::string_view reference) {
  const TokenSequence c = tokenize(candidate);
  const TokenSequence r = tokenize(reference);
  return rouge_l_f1(c, r);
}

double mean_pairwise_rouge(std::span<const std::string> responses) {
  if (responses.size() < 2) {
    throw InapplicableFeature("mean_pairwise_rouge: need at least 2 responses, got " +
                              std::to_string(responses.size()));
  }
  std::vector<TokenSequence> tokens;
  tokens.reserve(responses.size());
  for (const auto& r : responses) tokens.push_back(tokenize(r));

  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      sum += rouge_l_f1(tokens[i], tokens[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

std::string remove_stopwords(std::string_view text, const StopwordLexicon& lexicon) {
  std::string out;
  for (std::string_view word : split_words(text)) {
    const std::string tok = word_token(normalize_apostrophes(word));
    if (!tok.empty() && lexicon.removable(tok)) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(word);
  }
  return out;
}

}  // namespace llmconf::text
