#include "cantm/category.hpp"

#include <cctype>
#include <utility>

namespace cantm {
namespace {

std::string squash(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char ch : text) {
    if (std::isspace(ch) || ch == '_' || ch == '-' || ch == '.') continue;
    out.push_back(static_cast<char>(std::tolower(ch)));
  }
  return out;
}

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view text,
                           const std::array<std::pair<std::string_view, Enum>, N>& table) {
  const std::string key = squash(text);
  for (const auto& [name, value] : table) {
    if (key == name) return value;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Category c) {
  switch (c) {
    case Category::PubAuth: return "PubAuth";
    case Category::CommSpread: return "CommSpread";
    case Category::MedAdv: return "MedAdv";
    case Category::PromActs: return "PromActs";
    case Category::Consp: return "Consp";
    case Category::VirTrans: return "VirTrans";
    case Category::VirOrgn: return "VirOrgn";
    case Category::PubRec: return "PubRec";
    case Category::Vacc: return "Vacc";
    case Category::None: return "None";
  }
  return "None";
}

std::string_view to_string(Veracity v) {
  switch (v) {
    case Veracity::False: return "False";
    case Veracity::PartiallyFalse: return "PartiallyFalse";
    case Veracity::Misleading: return "Misleading";
    case Veracity::NoEvidence: return "NoEvidence";
    case Veracity::Other: return "Other";
  }
  return "Other";
}

std::string_view to_string(MediaType m) {
  switch (m) {
    case MediaType::Text: return "Text";
    case MediaType::Image: return "Image";
    case MediaType::Video: return "Video";
    case MediaType::Audio: return "Audio";
    case MediaType::NotClear: return "NotClear";
  }
  return "NotClear";
}

std::optional<Category> parse_category(std::string_view text) {
  static const std::array<std::pair<std::string_view, Category>, 30> table{{
      {"pubauth", Category::PubAuth},
      {"pubauthaction", Category::PubAuth},
      {"publicauthority", Category::PubAuth},
      {"publicauthorityaction", Category::PubAuth},
      {"commspread", Category::CommSpread},
      {"communityspread", Category::CommSpread},
      {"communityspreadandimpact", Category::CommSpread},
      {"medadv", Category::MedAdv},
      {"genmedadv", Category::MedAdv},
      {"medicaladvice", Category::MedAdv},
      {"generalmedicaladvice", Category::MedAdv},
      {"promacts", Category::PromActs},
      {"prominentactors", Category::PromActs},
      {"consp", Category::Consp},
      {"conspiracies", Category::Consp},
      {"conspiracy", Category::Consp},
      {"virtrans", Category::VirTrans},
      {"virustransmission", Category::VirTrans},
      {"virorgn", Category::VirOrgn},
      {"virusorigin", Category::VirOrgn},
      {"virusorigins", Category::VirOrgn},
      {"pubrec", Category::PubRec},
      {"pubprep", Category::PubRec},
      {"publicreaction", Category::PubRec},
      {"publicpreparedness", Category::PubRec},
      {"vacc", Category::Vacc},
      {"vaccines", Category::Vacc},
      {"vaccinedevelopment", Category::Vacc},
      {"none", Category::None},
      {"other", Category::None},
  }};
  return lookup(text, table);
}

std::optional<Veracity> parse_veracity(std::string_view text) {
  static const std::array<std::pair<std::string_view, Veracity>, 8> table{{
      {"false", Veracity::False},
      {"partiallyfalse", Veracity::PartiallyFalse},
      {"partfalse", Veracity::PartiallyFalse},
      {"misleading", Veracity::Misleading},
      {"noevidence", Veracity::NoEvidence},
      {"noevid", Veracity::NoEvidence},
      {"other", Veracity::Other},
      {"others", Veracity::Other},
  }};
  return lookup(text, table);
}

std::optional<MediaType> parse_media_type(std::string_view text) {
  static const std::array<std::pair<std::string_view, MediaType>, 6> table{{
      {"text", MediaType::Text},
      {"image", MediaType::Image},
      {"video", MediaType::Video},
      {"audio", MediaType::Audio},
      {"notclear", MediaType::NotClear},
      {"unclear", MediaType::NotClear},
  }};
  return lookup(text, table);
}

}  // namespace cantm
