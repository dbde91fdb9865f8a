#include "cantm/enrich.hpp"

#include <fstream>
#include <unordered_map>

#include "cantm/error.hpp"
#include "cantm/text.hpp"

namespace cantm::enrich {
namespace {

constexpr const char* kVeracityJson = R"({
  "False": ["pants on fire!", "false", "fake news", "fake", "incorrect", "hoax", "not true", "untrue", "fabricated", "wrong"],
  "Partially False": ["partially correct", "mostly false", "half truth", "half true", "partly false", "partially true", "partly true", "mixture", "mixed"],
  "Misleading": ["misleading", "missing context", "lacks context", "out of context", "exaggerated", "distorted"],
  "No Evidence": ["unproven", "unsubstantiated", "unverified", "not proven", "no proof"],
  "Other": ["satire", "explanatory", "others"]
})";

constexpr const char* kPlatformJson = R"({
  "Facebook": ["fb", "faceboos", "facebok", "face book", "facebook post", "facebook posts"],
  "Twitter": ["tweet", "tweets", "twiter", "twitt"],
  "WhatsApp": ["whatsap", "whats app", "watsapp", "wa"],
  "YouTube": ["youtuber", "you tube"],
  "Instagram": ["insta", "ig"],
  "TikTok": ["tik tok"],
  "LINE": ["line app", "line messenger"],
  "News": ["newspaper", "news website", "news outlet", "news outlets", "media outlet", "media outlets"],
  "Blog": ["blogs", "blogger", "blogspot", "blog post"],
  "TV": ["television", "tv channel", "tv news"],
  "Other Social": ["reddit", "vk", "weibo", "linkedin", "pinterest", "social media", "social network"],
  "Other Messaging": ["telegram", "wechat", "viber", "messenger", "sms", "messaging app", "text message"],
  "Other": ["website", "websites", "web", "multiple", "several"]
})";

constexpr const char* kMediaJson = R"({
  "Video": ["video", "videos", "clip", "footage", "livestream", "broadcast"],
  "Audio": ["radio", "audio", "voice message", "voice note", "recording", "podcast"],
  "Image": ["photo", "photograph", "photos", "photographs", "image", "images", "picture", "pictures", "meme", "screenshot", "infographic"],
  "Text": ["text", "message", "article", "post", "letter", "chain message"]
})";

constexpr const char* kMediaRulesJson = R"({
  "platform_rules": {"YouTube": "Video", "TV": "Video"},
  "claim_patterns": [
    {"pattern": "video", "media_type": "Video"},
    {"pattern": "videos", "media_type": "Video"},
    {"pattern": "footage", "media_type": "Video"},
    {"pattern": "clip", "media_type": "Video"},
    {"pattern": "audio", "media_type": "Audio"},
    {"pattern": "voice message", "media_type": "Audio"},
    {"pattern": "voice note", "media_type": "Audio"},
    {"pattern": "recording", "media_type": "Audio"},
    {"pattern": "radio", "media_type": "Audio"},
    {"pattern": "photo", "media_type": "Image"},
    {"pattern": "photograph", "media_type": "Image"},
    {"pattern": "photos", "media_type": "Image"},
    {"pattern": "image", "media_type": "Image"},
    {"pattern": "images", "media_type": "Image"},
    {"pattern": "picture", "media_type": "Image"},
    {"pattern": "meme", "media_type": "Image"},
    {"pattern": "screenshot", "media_type": "Image"},
    {"pattern": "text message", "media_type": "Text"},
    {"pattern": "message", "media_type": "Text"},
    {"pattern": "article", "media_type": "Text"},
    {"pattern": "post", "media_type": "Text"},
    {"pattern": "letter", "media_type": "Text"}
  ],
  "explanation_patterns": [
    {"pattern": "video", "media_type": "Video"},
    {"pattern": "footage", "media_type": "Video"},
    {"pattern": "audio", "media_type": "Audio"},
    {"pattern": "voice message", "media_type": "Audio"},
    {"pattern": "recording", "media_type": "Audio"},
    {"pattern": "photo", "media_type": "Image"},
    {"pattern": "photograph", "media_type": "Image"},
    {"pattern": "image", "media_type": "Image"},
    {"pattern": "picture", "media_type": "Image"},
    {"pattern": "screenshot", "media_type": "Image"},
    {"pattern": "text message", "media_type": "Text"},
    {"pattern": "article", "media_type": "Text"},
    {"pattern": "message", "media_type": "Text"}
  ],
  "sourcepage_patterns": [
    {"pattern": "this video", "media_type": "Video"},
    {"pattern": "the video", "media_type": "Video"},
    {"pattern": "viral video", "media_type": "Video"},
    {"pattern": "video shows", "media_type": "Video"},
    {"pattern": "audio message", "media_type": "Audio"},
    {"pattern": "voice message", "media_type": "Audio"},
    {"pattern": "audio clip", "media_type": "Audio"},
    {"pattern": "this photo", "media_type": "Image"},
    {"pattern": "the photo", "media_type": "Image"},
    {"pattern": "viral image", "media_type": "Image"},
    {"pattern": "the image", "media_type": "Image"},
    {"pattern": "viral message", "media_type": "Text"},
    {"pattern": "text message", "media_type": "Text"},
    {"pattern": "the message", "media_type": "Text"}
  ]
})";

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

MediaType parse_media_or_throw(const std::string& text) {
  auto m = parse_media_type(text);
  if (!m) throw ValidationError("unknown media type \"" + text + "\"");
  return *m;
}

std::vector<MediaPattern> parse_patterns(const nlohmann::json& j, const char* key) {
  std::vector<MediaPattern> out;
  auto it = j.find(key);
  if (it == j.end()) return out;
  if (!it->is_array()) throw ParseError(std::string("media rules: '") + key + "' must be an array");
  for (const auto& p : *it) {
    MediaPattern pattern{Phrase(p.at("pattern").get<std::string>()),
                         parse_media_or_throw(p.at("media_type").get<std::string>())};
    if (pattern.phrase.words().empty()) throw ValidationError(std::string("media rules: empty pattern in '") + key + "'");
    out.push_back(std::move(pattern));
  }
  return out;
}

}  // namespace

Phrase::Phrase(std::string_view text) : words_(text::split_words(text)) {}

std::string Phrase::text() const { return join(words_); }

std::size_t Phrase::match_at(const std::vector<std::string>& words, std::size_t pos) const {
  if (words_.empty() || pos + words_.size() > words.size()) return 0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words[pos + i] != words_[i]) return 0;
  }
  return words_.size();
}

MappingList::MappingList(std::vector<std::pair<std::string, std::vector<std::string>>> entries) {
  std::unordered_map<std::string, std::string> owner;
  for (auto& [standard, raws] : entries) {
    Entry entry{standard, {}};
    raws.insert(raws.begin(), standard);
    for (const auto& raw : raws) {
      Phrase phrase(raw);
      if (phrase.words().empty()) throw ValidationError("mapping list: empty raw word under \"" + standard + "\"");
      const auto key = phrase.text();
      auto [it, inserted] = owner.emplace(key, standard);
      if (!inserted) {
        if (it->second != standard)
          throw ValidationError("mapping list: raw word \"" + key + "\" listed under both \"" + it->second +
                                "\" and \"" + standard + "\"");
        continue;
      }
      entry.raw.push_back(std::move(phrase));
    }
    entries_.push_back(std::move(entry));
  }
}

MappingList MappingList::from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw ParseError("mapping list must be a JSON object");
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_array()) throw ParseError("mapping list: value for \"" + key + "\" must be an array");
    entries.emplace_back(key, value.get<std::vector<std::string>>());
  }
  return MappingList(std::move(entries));
}

MappingList MappingList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return from_json(nlohmann::ordered_json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> normalize_field(std::string_view text, const MappingList& mapping) {
  const auto words = text::split_words(text);
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < words.size()) {
    std::size_t best_len = 0;
    const std::string* best_value = nullptr;
    for (const auto& entry : mapping.entries()) {
      for (const auto& phrase : entry.raw) {
        const auto len = phrase.match_at(words, pos);
        if (len > best_len) {
          best_len = len;
          best_value = &entry.standard_value;
        }
      }
    }
    if (best_value) {
      if (std::find(out.begin(), out.end(), *best_value) == out.end()) out.push_back(*best_value);
      pos += best_len;
    } else {
      ++pos;
    }
  }
  return out;
}

MediaRuleSet MediaRuleSet::from_json(const nlohmann::json& j) {
  MediaRuleSet rules;
  try {
    if (auto it = j.find("platform_rules"); it != j.end()) {
      for (const auto& [platform, media] : it->items())
        rules.platform_rules[text::to_lower(platform)] = parse_media_or_throw(media.get<std::string>());
    }
    rules.claim_patterns = parse_patterns(j, "claim_patterns");
    rules.explanation_patterns = parse_patterns(j, "explanation_patterns");
    rules.sourcepage_patterns = parse_patterns(j, "sourcepage_patterns");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("media rules: ") + e.what());
  }
  return rules;
}

MediaRuleSet MediaRuleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::optional<MediaType> match_patterns(std::string_view text, const std::vector<MediaPattern>& patterns) {
  const auto words = text::split_words(text);
  for (const auto& p : patterns) {
    for (std::size_t pos = 0; pos < words.size(); ++pos) {
      if (p.phrase.match_at(words, pos)) return p.media_type;
    }
  }
  return std::nullopt;
}

std::optional<MediaType> extract_media_type(const corpus::DebunkRecord& record,
                                            const std::optional<std::string>& source_text,
                                            const MediaRuleSet& rules) {
  for (const auto& platform : record.platform) {
    if (auto it = rules.platform_rules.find(text::to_lower(platform)); it != rules.platform_rules.end())
      return it->second;
  }
  if (auto m = match_patterns(record.claim, rules.claim_patterns)) return m;
  if (auto m = match_patterns(record.explanation, rules.explanation_patterns)) return m;
  if (source_text) {
    if (auto m = match_patterns(*source_text, rules.sourcepage_patterns)) return m;
  }
  return std::nullopt;
}

const MappingList& default_veracity_mapping() {
  static const MappingList m = MappingList::from_json(nlohmann::ordered_json::parse(kVeracityJson));
  return m;
}

const MappingList& default_platform_mapping() {
  static const MappingList m = MappingList::from_json(nlohmann::ordered_json::parse(kPlatformJson));
  return m;
}

const MappingList& default_media_mapping() {
  static const MappingList m = MappingList::from_json(nlohmann::ordered_json::parse(kMediaJson));
  return m;
}

const MediaRuleSet& default_media_rules() {
  static const MediaRuleSet r = MediaRuleSet::from_json(nlohmann::json::parse(kMediaRulesJson));
  return r;
}

}  // namespace cantm::enrich
