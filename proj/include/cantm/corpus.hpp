#ifndef CANTM_CORPUS_HPP_
#define CANTM_CORPUS_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cantm/category.hpp"
#include "cantm/text.hpp"

namespace cantm::corpus {

using Date = std::chrono::year_month_day;

// Strict ISO-8601 calendar date, YYYY-MM-DD.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

// One debunked claim.
struct DebunkRecord {
  std::string id;
  Date debunk_date{};
  std::string claim;
  std::string explanation;
  std::string source_link;
  std::optional<Veracity> veracity;
  std::vector<std::string> platform;
  std::optional<std::string> language;
  std::optional<MediaType> media_type;
  std::optional<Category> category;
};

enum class RecordFormat { JsonLines, Csv };

std::optional<RecordFormat> parse_record_format(std::string_view name);

// Builds a record from one JSON object. Required: id, debunk_date, claim.
// Optional enum fields that do not parse are left unset. `platform` may be a
// JSON array or a string separated by ',' or ';'.
DebunkRecord record_from_json(const nlohmann::json& obj);
nlohmann::ordered_json record_to_json(const DebunkRecord& r);

// Throws ParseError (with line locus) on malformed input and ValidationError
// on duplicate ids or empty claims.
std::vector<DebunkRecord> load_debunks(const std::filesystem::path& path, RecordFormat format);
std::vector<DebunkRecord> parse_debunks_jsonl(std::istream& in, const std::string& source = "<stream>");
std::vector<DebunkRecord> parse_debunks_csv(std::istream& in, const std::string& source = "<stream>");

void write_debunks_jsonl(std::ostream& out, std::span<const DebunkRecord> records);

// RFC 4180 record splitter; exposed for the trend CSV reader.
std::vector<std::vector<std::string>> parse_csv(std::istream& in, const std::string& source);

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(std::size_t i) const { return tokens_[i]; }
  std::optional<std::int32_t> find(std::string_view token) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

// Sparse token counts; entries sorted by position, every count >= 1.
struct BowVector {
  struct Entry {
    std::int32_t index;
    std::int32_t count;
    bool operator==(const Entry&) const = default;
  };

  std::string doc_id;
  std::vector<Entry> entries;

  bool empty() const { return entries.empty(); }
  std::int64_t total() const;
};

struct LabeledDocument {
  DebunkRecord record;
  std::string text;  // claim + " " + explanation
  std::optional<Category> label;
  BowVector bow;

  // Key into a precomputed embedding table.
  const std::string& encoder_key() const { return record.id; }
};

LabeledDocument make_document(DebunkRecord record, std::optional<Category> label = std::nullopt);

// Lowercase, drop stopwords/short/digit tokens, keep the `max_size` most
// frequent survivors, ties broken lexicographically. Throws ValidationError
// when nothing survives.
Vocabulary build_vocabulary(std::span<const std::string> texts, std::size_t max_size,
                            const text::StopwordSet& stopwords = text::default_stopwords());
Vocabulary build_vocabulary(std::span<const LabeledDocument> docs, std::size_t max_size,
                            const text::StopwordSet& stopwords = text::default_stopwords());

// Counts in-vocabulary tokens; the result is empty() when none occur.
BowVector to_bow(std::string_view text, const Vocabulary& vocab, std::string doc_id = {});
BowVector to_bow(const LabeledDocument& doc, const Vocabulary& vocab);

// Fills doc.bow for every document.
void attach_bows(std::span<LabeledDocument> docs, const Vocabulary& vocab);

// k disjoint folds of indices [0, n). Fold sizes differ by at most one
// (the first n % k folds get the extra item); deterministic in `seed`.
std::vector<std::vector<std::size_t>> split_folds(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace cantm::corpus

#endif  // CANTM_CORPUS_HPP_
