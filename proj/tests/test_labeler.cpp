#include <doctest.h>

#include <fstream>
#include <sstream>

#include "llmconf/errors.hpp"
#include "llmconf/labeler.hpp"
#include "llmconf/text.hpp"
#include "test_support.hpp"

using namespace llmconf;

namespace {

LabeledExample example(const std::string& id, int label) {
  LabeledExample ex;
  ex.features.record_id = id;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    ex.features.values[i] = 0.1 * static_cast<double>(i) + (label ? 0.05 : 0.0);
    ex.features.applicability[i] = i != 10;
  }
  ex.label = label;
  ex.match_score = label ? 1.0 : 0.0;
  ex.provenance.primary_response = "Answer with \"quotes\", commas";
  ex.provenance.noop_fallback[2] = true;
  ex.provenance.generations = {5, 5, 5, 5, 5, 0};
  return ex;
}

}  // namespace

TEST_CASE("labels from ROUGE-L against gold answers") {
  const std::vector<std::string> france = {"France"};
  auto r = label("France", france);
  CHECK(r.label == 1);
  CHECK(r.match_score == 1.0);
  r = label("Iceland", france);
  CHECK(r.label == 0);
  CHECK(r.match_score == 0.0);

  // Best match over several golds.
  const std::vector<std::string> golds = {"Iceland", "the kingdom of France"};
  CHECK(label("France", golds).match_score == doctest::Approx(0.4));
  CHECK(label("France", golds).label == 1);
  CHECK_THROWS_AS(label("x", std::vector<std::string>{}), DataError);
}

TEST_CASE("score exactly at theta is correct") {
  // LCS 3 of 10 tokens on both sides: F1 = 0.3.
  const std::string resp = "a b c d e f g h i j";
  const std::string gold = "a b c k l m n o p q";
  const std::vector<std::string> golds = {gold};
  REQUIRE(text::rouge_l_f1(resp, gold) == 0.3);
  CHECK(label(resp, golds, {"rouge-l-f1", 0.3}).label == 1);
  CHECK(label(resp, golds, {"rouge-l-f1", 0.30000001}).label == 0);
}

TEST_CASE("label config validation") {
  CHECK_NOTHROW(LabelConfig{}.validate());
  CHECK_THROWS_AS((LabelConfig{"bleu", 0.3}.validate()), ConfigError);
  CHECK_THROWS_AS((LabelConfig{"rouge-l-f1", 1.5}.validate()), ConfigError);
}

TEST_CASE("feature table round trips through JSONL") {
  TempDir dir("labels");
  std::vector<LabeledExample> rows = {example("a", 1), example("b", 0)};
  write_jsonl(dir / "t.jsonl", rows);
  const auto back = read_jsonl(dir / "t.jsonl");
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].record_id() == rows[i].record_id());
    CHECK(back[i].features.values == rows[i].features.values);
    CHECK(back[i].features.applicability == rows[i].features.applicability);
    CHECK(back[i].label == rows[i].label);
    CHECK(back[i].provenance.noop_fallback == rows[i].provenance.noop_fallback);
    CHECK(back[i].provenance.generations == rows[i].provenance.generations);
    CHECK(back[i].provenance.primary_response == rows[i].provenance.primary_response);
  }
  // Re-serializing gives identical bytes.
  write_jsonl(dir / "u.jsonl", back);
  std::ifstream a(dir / "t.jsonl"), b(dir / "u.jsonl");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("malformed rows are data errors") {
  TempDir dir("labels-bad");
  std::ofstream(dir / "bad.jsonl") << "{\"record_id\":\"a\",\"values\":[1,2]}\n";
  CHECK_THROWS_AS(read_jsonl(dir / "bad.jsonl"), DataError);
  CHECK_THROWS_AS(read_jsonl(dir / "missing.jsonl"), DataError);
}

TEST_CASE("CSV export has a header and one line per row") {
  TempDir dir("labels-csv");
  std::vector<LabeledExample> rows = {example("a", 1), example("b", 0)};
  write_csv(dir / "t.csv", rows);
  std::ifstream in(dir / "t.csv");
  std::string header, line;
  std::getline(in, header);
  CHECK(header.find("SD.sets") != std::string::npos);
  CHECK(header.find("label") != std::string::npos);
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 2);
}
