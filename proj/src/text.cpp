#include "cantm/text.hpp"

#include <cctype>
#include <fstream>

#include "cantm/error.hpp"

namespace cantm::text {
namespace {

bool is_ascii_punct(char ch) {
  const auto u = static_cast<unsigned char>(ch);
  return u < 0x80 && std::ispunct(u);
}

bool is_ascii_space(char ch) {
  const auto u = static_cast<unsigned char>(ch);
  return u < 0x80 && std::isspace(u);
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) {
    const auto u = static_cast<unsigned char>(ch);
    if (u < 0x80) ch = static_cast<char>(std::tolower(u));
  }
  return out;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char ch : s) {
    if ((ch & 0xC0) != 0x80) ++n;
  }
  return n;
}

bool contains_digit(std::string_view s) {
  for (unsigned char ch : s) {
    if (ch < 0x80 && std::isdigit(ch)) return true;
  }
  return false;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_ascii_space(s[j])) ++j;
    std::size_t b = i, e = j;
    while (b < e && is_ascii_punct(s[b])) ++b;
    while (e > b && is_ascii_punct(s[e - 1])) --e;
    if (e > b) words.push_back(to_lower(s.substr(b, e - b)));
    i = j;
  }
  return words;
}

std::vector<std::string> bow_tokens(std::string_view s, const StopwordSet& stopwords) {
  std::vector<std::string> out;
  for (auto& w : split_words(s)) {
    if (utf8_length(w) < 3 || contains_digit(w) || stopwords.contains(w)) continue;
    out.push_back(std::move(w));
  }
  return out;
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your",
      "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
      "herself", "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what",
      "which", "who", "whom", "this", "that", "these", "those", "am", "is", "are",
      "was", "were", "be", "been", "being", "have", "has", "had", "having", "do",
      "does", "did", "doing", "would", "should", "could", "ought", "i'm", "you're", "he's",
      "she's", "it's", "we're", "they're", "i've", "you've", "we've", "they've", "i'd", "you'd",
      "he'd", "she'd", "we'd", "they'd", "i'll", "you'll", "he'll", "she'll", "we'll", "they'll",
      "isn't", "aren't", "wasn't", "weren't", "hasn't", "haven't", "hadn't", "doesn't", "don't", "didn't",
      "won't", "wouldn't", "shan't", "shouldn't", "can't", "cannot", "couldn't", "mustn't", "let's", "that's",
      "who's", "what's", "here's", "there's", "when's", "where's", "why's", "how's", "a", "an",
      "the", "and", "but", "if", "or", "because", "as", "until", "while", "of",
      "at", "by", "for", "with", "about", "against", "between", "into", "through", "during",
      "before", "after", "above", "below", "to", "from", "up", "down", "in", "out",
      "on", "off", "over", "under", "again", "further", "then", "once", "here", "there",
      "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
      "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same",
      "so", "than", "too", "very",
  };
  return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open stopword file " + path.string());
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t b = 0, e = line.size();
    while (b < e && is_ascii_space(line[b])) ++b;
    while (e > b && is_ascii_space(line[e - 1])) --e;
    if (b == e || line[b] == '#') continue;
    words.insert(to_lower(std::string_view(line).substr(b, e - b)));
  }
  return words;
}

}  // namespace cantm::text
