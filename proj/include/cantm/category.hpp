#ifndef CANTM_CATEGORY_HPP_
#define CANTM_CATEGORY_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace cantm {

// The ten disinformation categories, in canonical order.
enum class Category {
  PubAuth,
  CommSpread,
  MedAdv,
  PromActs,
  Consp,
  VirTrans,
  VirOrgn,
  PubRec,
  Vacc,
  None,
};

inline constexpr std::array<Category, 10> kAllCategories = {
    Category::PubAuth, Category::CommSpread, Category::MedAdv, Category::PromActs,
    Category::Consp,   Category::VirTrans,   Category::VirOrgn, Category::PubRec,
    Category::Vacc,    Category::None,
};

enum class Veracity { False, PartiallyFalse, Misleading, NoEvidence, Other };

enum class MediaType { Text, Image, Video, Audio, NotClear };

std::string_view to_string(Category c);
std::string_view to_string(Veracity v);
std::string_view to_string(MediaType m);

// Parsers accept the canonical short names plus common long forms and
// aliases ("Other" -> None, "PubPrep" -> PubRec). Matching ignores case,
// whitespace, '_' and '-'. Unknown text yields nullopt.
std::optional<Category> parse_category(std::string_view text);
std::optional<Veracity> parse_veracity(std::string_view text);
std::optional<MediaType> parse_media_type(std::string_view text);

}  // namespace cantm

#endif  // CANTM_CATEGORY_HPP_
