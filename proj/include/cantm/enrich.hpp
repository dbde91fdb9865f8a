#ifndef CANTM_ENRICH_HPP_
#define CANTM_ENRICH_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cantm/category.hpp"
#include "cantm/corpus.hpp"

namespace cantm::enrich {

// A word or contiguous phrase, stored as lowercase words with surrounding
// punctuation stripped.
class Phrase {
 public:
  explicit Phrase(std::string_view text);
  const std::vector<std::string>& words() const { return words_; }
  std::string text() const;
  // Length of the match at words[pos], or 0.
  std::size_t match_at(const std::vector<std::string>& words, std::size_t pos) const;

 private:
  std::vector<std::string> words_;
};

// Ordered (standard value, raw phrases) pairs. The lowercased standard value
// itself is always an implicit raw phrase, so normalizing the rendered output
// reproduces it. Construction rejects a raw phrase listed under two values.
class MappingList {
 public:
  struct Entry {
    std::string standard_value;
    std::vector<Phrase> raw;
  };

  MappingList() = default;
  explicit MappingList(std::vector<std::pair<std::string, std::vector<std::string>>> entries);

  // JSON object {standard_value: [raw words...]}, key order preserved.
  static MappingList from_json(const nlohmann::ordered_json& j);
  static MappingList load(const std::filesystem::path& path);

  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

// Scans the text left to right; at each word the longest matching raw phrase
// wins and its words are consumed. Emits standard values in first-occurrence
// order without duplicates.
std::vector<std::string> normalize_field(std::string_view text, const MappingList& mapping);

struct MediaPattern {
  Phrase phrase;
  MediaType media_type;
};

struct MediaRuleSet {
  std::map<std::string, MediaType> platform_rules;  // keys lowercase
  std::vector<MediaPattern> claim_patterns;
  std::vector<MediaPattern> explanation_patterns;
  std::vector<MediaPattern> sourcepage_patterns;

  static MediaRuleSet from_json(const nlohmann::json& j);
  static MediaRuleSet load(const std::filesystem::path& path);
};

// First pattern, in list order, that occurs in the text.
std::optional<MediaType> match_patterns(std::string_view text, const std::vector<MediaPattern>& patterns);

// Priority: platform rule, claim pattern, explanation pattern, source-page
// pattern, else unset.
std::optional<MediaType> extract_media_type(const corpus::DebunkRecord& record,
                                            const std::optional<std::string>& source_text,
                                            const MediaRuleSet& rules);

// Shipped defaults (also available as files under data/).
const MappingList& default_veracity_mapping();
const MappingList& default_platform_mapping();
const MappingList& default_media_mapping();
const MediaRuleSet& default_media_rules();

}  // namespace cantm::enrich

#endif  // CANTM_ENRICH_HPP_
