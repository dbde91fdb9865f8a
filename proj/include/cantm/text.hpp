#ifndef CANTM_TEXT_HPP_
#define CANTM_TEXT_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cantm::text {

using StopwordSet = std::unordered_set<std::string>;

// ASCII lowercase; bytes >= 0x80 (UTF-8 continuation/lead bytes) pass through.
std::string to_lower(std::string_view s);

// Number of UTF-8 code points.
std::size_t utf8_length(std::string_view s);

bool contains_digit(std::string_view s);

// Splits on whitespace, strips leading/trailing ASCII punctuation from each
// piece, lowercases, and drops pieces that become empty. Internal
// punctuation ("covid-19", "u.s") is kept.
std::vector<std::string> split_words(std::string_view s);

// BoW preprocessing: split_words, then drop stopwords, tokens shorter than
// three characters, and tokens containing a digit.
std::vector<std::string> bow_tokens(std::string_view s, const StopwordSet& stopwords);

// The snowball English stop list.
const StopwordSet& default_stopwords();

// One lowercase token per line; blank lines and '#' comments ignored.
StopwordSet load_stopwords(const std::filesystem::path& path);

}  // namespace cantm::text

#endif  // CANTM_TEXT_HPP_
