#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "cantm/corpus.hpp"
#include "cantm/error.hpp"

namespace cantm::corpus {
namespace {

using std::chrono::day;
using std::chrono::month;
using std::chrono::year;

TEST(Dates, ParsesIsoCalendarDates) {
  auto d = parse_date("2020-03-29");
  ASSERT_TRUE(d);
  EXPECT_EQ(*d, (Date{year{2020}, month{3}, day{29}}));
  EXPECT_EQ(format_date(*d), "2020-03-29");
  EXPECT_FALSE(parse_date("2020-02-30"));
  EXPECT_FALSE(parse_date("2020-3-29"));
  EXPECT_FALSE(parse_date("29/03/2020"));
  EXPECT_FALSE(parse_date(""));
}

TEST(Categories, ParsesShortNamesAliasesAndSpacing) {
  EXPECT_EQ(parse_category("PubAuth"), Category::PubAuth);
  EXPECT_EQ(parse_category("pubauth"), Category::PubAuth);
  EXPECT_EQ(parse_category("Other"), Category::None);
  EXPECT_EQ(parse_category("PubPrep"), Category::PubRec);
  EXPECT_EQ(parse_category("Vacc"), Category::Vacc);
  EXPECT_FALSE(parse_category("Nonsense"));
  for (Category c : kAllCategories) EXPECT_EQ(parse_category(to_string(c)), c);
  EXPECT_EQ(parse_veracity("Partially False"), Veracity::PartiallyFalse);
  EXPECT_EQ(parse_media_type("not clear"), MediaType::NotClear);
}

TEST(Records, JsonRecordWithPlatformString) {
  auto j = nlohmann::json::parse(R"({"id":"a1","debunk_date":"2020-04-01","claim":"Garlic cures it",
    "explanation":"No evidence.","source_link":"http://x","veracity":"False","platform":"Facebook; WhatsApp",
    "language":"en","media_type":"Image","category":"MedAdv"})");
  const auto r = record_from_json(j);
  EXPECT_EQ(r.id, "a1");
  EXPECT_EQ(r.veracity, Veracity::False);
  EXPECT_EQ(r.platform, (std::vector<std::string>{"Facebook", "WhatsApp"}));
  EXPECT_EQ(r.media_type, MediaType::Image);
  EXPECT_EQ(r.category, Category::MedAdv);
  EXPECT_EQ(record_from_json(nlohmann::json::parse(record_to_json(r).dump())).platform, r.platform);
}

TEST(Records, UnparseableEnumsStayUnset) {
  auto j = nlohmann::json::parse(R"({"id":"a","debunk_date":"2020-04-01","claim":"c","veracity":"pants on fire",
    "category":"Weird"})");
  const auto r = record_from_json(j);
  EXPECT_FALSE(r.veracity);
  EXPECT_FALSE(r.category);
}

TEST(Records, EmptyClaimIsAValidationError) {
  auto j = nlohmann::json::parse(R"({"id":"a","debunk_date":"2020-04-01","claim":"  "})");
  EXPECT_THROW(record_from_json(j), ValidationError);
}

TEST(Records, JsonLinesErrorsNameTheLine) {
  std::istringstream in("{\"id\":\"a\",\"debunk_date\":\"2020-04-01\",\"claim\":\"c\"}\n\n{\"id\":\"b\",\"claim\":\"c\"}\n");
  try {
    parse_debunks_jsonl(in, "f.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("f.jsonl:3:"), std::string::npos) << e.what();
  }
}

TEST(Records, DuplicateIdNamesTheId) {
  std::istringstream in(
      "{\"id\":\"dup\",\"debunk_date\":\"2020-04-01\",\"claim\":\"c\"}\n"
      "{\"id\":\"dup\",\"debunk_date\":\"2020-04-02\",\"claim\":\"d\"}\n");
  try {
    parse_debunks_jsonl(in);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("dup"), std::string::npos);
  }
}

TEST(Records, CsvWithQuotedFields) {
  std::istringstream in(
      "id,debunk_date,claim,explanation,source_link,veracity,platform,language,media_type,category\n"
      "c1,2020-05-02,\"Says \"\"5G\"\" spreads it, really\",\"Line one\nline two\",,False,\"Twitter,Facebook\",en,,Consp\n");
  const auto rs = parse_debunks_csv(in, "f.csv");
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].claim, "Says \"5G\" spreads it, really");
  EXPECT_EQ(rs[0].explanation, "Line one\nline two");
  EXPECT_EQ(rs[0].platform, (std::vector<std::string>{"Twitter", "Facebook"}));
  EXPECT_FALSE(rs[0].media_type);
  EXPECT_EQ(rs[0].category, Category::Consp);
}

TEST(Records, CsvFieldCountMismatchIsAParseError) {
  std::istringstream in("id,debunk_date,claim\nc1,2020-05-02\n");
  EXPECT_THROW(parse_debunks_csv(in, "f.csv"), ParseError);
}

TEST(Text, SplitWordsStripsOuterPunctuation) {
  EXPECT_EQ(text::split_words("  \"Hello,\" she said... (COVID-19) U.S. -- ok "),
            (std::vector<std::string>{"hello", "she", "said", "covid-19", "u.s", "ok"}));
  EXPECT_EQ(text::split_words(""), std::vector<std::string>{});
  EXPECT_EQ(text::utf8_length("café"), 4u);
  EXPECT_TRUE(text::contains_digit("x1y"));
}

TEST(Text, BowTokensApplyAllFilters) {
  EXPECT_EQ(text::bow_tokens("The U.S. has 5G masts and THE virus", text::default_stopwords()),
            (std::vector<std::string>{"u.s", "masts", "virus"}));
}

TEST(Vocabulary, DropsStopwordsShortAndDigitTokens) {
  const std::vector<std::string> texts = {"The COVID-19 virus spreads"};
  const auto v = build_vocabulary(texts, 2000);
  std::set<std::string> got(v.tokens().begin(), v.tokens().end());
  EXPECT_EQ(got, (std::set<std::string>{"virus", "spreads"}));
}

TEST(Vocabulary, NothingSurvivingIsAnError) {
  const std::vector<std::string> texts = {"aa bb"};
  EXPECT_THROW(build_vocabulary(texts, 2000), ValidationError);
}

TEST(Vocabulary, FrequencyOrderWithLexicographicTiesAndCap) {
  const std::vector<std::string> texts = {"zebra apple mango apple", "mango zebra kiwi apple"};
  const auto v = build_vocabulary(texts, 3);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"apple", "mango", "zebra"}));
  EXPECT_EQ(v.find("mango"), 1);
  EXPECT_FALSE(v.find("kiwi"));
}

TEST(Vocabulary, NeverEmitsForbiddenTokens) {
  const std::vector<std::string> texts = {"Its 2020 and we're at it: ok, x1y, ab, Hello!! world... (again)",
                                          "\"Quoted\" words; MIXED case; über café"};
  const auto v = build_vocabulary(texts, 100);
  const auto& stop = text::default_stopwords();
  for (const auto& t : v.tokens()) {
    EXPECT_GE(text::utf8_length(t), 3u) << t;
    EXPECT_FALSE(text::contains_digit(t)) << t;
    EXPECT_FALSE(stop.contains(t)) << t;
    EXPECT_EQ(t, text::to_lower(t));
  }
  EXPECT_TRUE(v.find("hello"));
  EXPECT_TRUE(v.find("café"));
}

TEST(Bow, CountsInVocabularyTokensOnly) {
  const Vocabulary v({"virus", "spreads", "garlic"});
  const auto bow = to_bow("Virus virus spreads; unknown words VIRUS!", v, "d");
  EXPECT_EQ(bow.doc_id, "d");
  ASSERT_EQ(bow.entries.size(), 2u);
  EXPECT_EQ(bow.entries[0], (BowVector::Entry{0, 3}));
  EXPECT_EQ(bow.entries[1], (BowVector::Entry{1, 1}));
  EXPECT_TRUE(to_bow("nothing here", v).empty());
}

TEST(Bow, CorpusTokenCountIsConserved) {
  const std::vector<std::string> texts = {"cats chase mice and mice flee", "dogs chase cats", "mice mice mice"};
  const auto v = build_vocabulary(texts, 100);
  std::int64_t bow_total = 0, direct = 0;
  for (const auto& t : texts) {
    bow_total += to_bow(t, v).total();
    for (const auto& w : text::split_words(t)) direct += v.find(w).has_value();
  }
  EXPECT_EQ(bow_total, direct);
  EXPECT_EQ(bow_total, 11);
}

TEST(Documents, TextJoinsClaimAndExplanation) {
  DebunkRecord r;
  r.id = "x";
  r.claim = "Claim text";
  r.explanation = "More text";
  r.category = Category::Vacc;
  const auto d = make_document(r);
  EXPECT_EQ(d.text, "Claim text More text");
  EXPECT_EQ(d.label, Category::Vacc);
  EXPECT_EQ(d.encoder_key(), "x");
}

TEST(Folds, PartitionWithBalancedSizes) {
  const auto folds = split_folds(23, 5, 9);
  ASSERT_EQ(folds.size(), 5u);
  std::vector<std::size_t> all;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    EXPECT_EQ(folds[f].size(), f < 3 ? 5u : 4u);
    all.insert(all.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(23);
  std::iota(expect.begin(), expect.end(), std::size_t{0});
  EXPECT_EQ(all, expect);
  EXPECT_EQ(split_folds(23, 5, 9), folds);
  EXPECT_NE(split_folds(23, 5, 10), folds);
  EXPECT_THROW(split_folds(3, 5, 0), ValidationError);
  EXPECT_THROW(split_folds(10, 1, 0), ValidationError);
}

TEST(Stopwords, LoadsOneTokenPerLine) {
  const auto path = std::filesystem::temp_directory_path() / "cantm_stopwords_test.txt";
  {
    std::ofstream out(path);
    out << "alpha\n\nBeta\n";
  }
  const auto s = text::load_stopwords(path);
  EXPECT_TRUE(s.contains("alpha"));
  EXPECT_TRUE(s.contains("beta"));
  EXPECT_EQ(s.size(), 2u);
  std::filesystem::remove(path);
}

TEST(Stopwords, ShippedFileMatchesBuiltInList) {
  const auto s = text::load_stopwords(std::filesystem::path(CANTM_DATA_DIR) / "stopwords_en.txt");
  EXPECT_EQ(s, text::default_stopwords());
}

}  // namespace
}  // namespace cantm::corpus
