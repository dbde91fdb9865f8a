#include <gtest/gtest.h>

#include <filesystem>

#include "cantm/enrich.hpp"
#include "cantm/error.hpp"

namespace cantm::enrich {
namespace {

const std::filesystem::path kData = CANTM_DATA_DIR;

using Strings = std::vector<std::string>;

TEST(Normalize, PlatformExamples) {
  const auto& m = default_platform_mapping();
  EXPECT_EQ(normalize_field("shared on FB and faceboos", m), Strings{"Facebook"});
  EXPECT_EQ(normalize_field("zzz qqq", m), Strings{});
  EXPECT_EQ(normalize_field("WhatsApp, then Twitter and whatsapp again", m), (Strings{"WhatsApp", "Twitter"}));
}

TEST(Normalize, VeracityExamples) {
  const auto& m = default_veracity_mapping();
  EXPECT_EQ(normalize_field("Pants on Fire!", m), Strings{"False"});
  EXPECT_EQ(normalize_field("PANTS ON FIRE", m), Strings{"False"});
  EXPECT_EQ(normalize_field("Mostly False", m), Strings{"Partially False"});
}

TEST(Normalize, IdempotentOnRenderedOutput) {
  for (const auto* m : {&default_platform_mapping(), &default_veracity_mapping(), &default_media_mapping()}) {
    for (const auto& e : m->entries()) {
      for (const auto& raw : e.raw) {
        const auto once = normalize_field(raw.text(), *m);
        std::string rendered;
        for (const auto& v : once) rendered += (rendered.empty() ? "" : ", ") + v;
        EXPECT_EQ(normalize_field(rendered, *m), once) << raw.text();
      }
    }
  }
}

TEST(Normalize, LongestPhraseWins) {
  const MappingList m({{"Short", {"fire"}}, {"Long", {"pants on fire"}}});
  EXPECT_EQ(normalize_field("pants on fire", m), Strings{"Long"});
  EXPECT_EQ(normalize_field("just fire", m), Strings{"Short"});
}

TEST(MappingList, ConflictingRawPhraseIsRejected) {
  EXPECT_THROW(MappingList({{"A", {"same"}}, {"B", {"Same"}}}), ValidationError);
}

TEST(MediaType, PriorityOrder) {
  const auto& rules = default_media_rules();
  corpus::DebunkRecord r;
  r.id = "r";
  r.claim = "A photo of the minister";
  r.platform = {"TV"};
  EXPECT_EQ(extract_media_type(r, std::nullopt, rules), MediaType::Video);

  r.platform.clear();
  r.claim = "A photograph has been shared";
  EXPECT_EQ(extract_media_type(r, std::nullopt, rules), MediaType::Image);

  r.claim = "Lemon water prevents infection";
  EXPECT_FALSE(extract_media_type(r, std::nullopt, rules));
  r.explanation = "The audio message circulated widely";
  EXPECT_EQ(extract_media_type(r, std::nullopt, rules), MediaType::Audio);
}

TEST(MediaType, SourcePageIsLastResort) {
  corpus::DebunkRecord r;
  r.claim = "Lemon water prevents infection";
  EXPECT_EQ(extract_media_type(r, std::string("Watch the video below"), default_media_rules()), MediaType::Video);
}

bool same_mapping(const MappingList& a, const MappingList& b) {
  if (a.entries().size() != b.entries().size()) return false;
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    const auto& x = a.entries()[i];
    const auto& y = b.entries()[i];
    if (x.standard_value != y.standard_value || x.raw.size() != y.raw.size()) return false;
    for (std::size_t k = 0; k < x.raw.size(); ++k) {
      if (x.raw[k].words() != y.raw[k].words()) return false;
    }
  }
  return true;
}

bool same_patterns(const std::vector<MediaPattern>& a, const std::vector<MediaPattern>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].phrase.words() != b[i].phrase.words() || a[i].media_type != b[i].media_type) return false;
  }
  return true;
}

TEST(DataFiles, MatchBuiltInDefaults) {
  EXPECT_TRUE(same_mapping(MappingList::load(kData / "veracity.json"), default_veracity_mapping()));
  EXPECT_TRUE(same_mapping(MappingList::load(kData / "platform.json"), default_platform_mapping()));
  EXPECT_TRUE(same_mapping(MappingList::load(kData / "media_keywords.json"), default_media_mapping()));
  const auto rules = MediaRuleSet::load(kData / "media_rules.json");
  const auto& def = default_media_rules();
  EXPECT_EQ(rules.platform_rules, def.platform_rules);
  EXPECT_TRUE(same_patterns(rules.claim_patterns, def.claim_patterns));
  EXPECT_TRUE(same_patterns(rules.explanation_patterns, def.explanation_patterns));
  EXPECT_TRUE(same_patterns(rules.sourcepage_patterns, def.sourcepage_patterns));
}

}  // namespace
}  // namespace cantm::enrich
