#include "cantm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "cantm/error.hpp"

namespace cantm::corpus {

using nlohmann::json;

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto parse = [&](std::size_t off, std::size_t len, auto& out) {
    auto [p, ec] = std::from_chars(text.data() + off, text.data() + off + len, out);
    return ec == std::errc() && p == text.data() + off + len;
  };
  if (!parse(0, 4, y) || !parse(5, 2, m) || !parse(8, 2, d)) return std::nullopt;
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::optional<RecordFormat> parse_record_format(std::string_view name) {
  if (name == "jsonl" || name == "json-lines" || name == "jsonlines") return RecordFormat::JsonLines;
  if (name == "csv") return RecordFormat::Csv;
  return std::nullopt;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_platforms(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',' || s[i] == ';') {
      auto piece = trim(s.substr(start, i - start));
      if (!piece.empty()) out.push_back(std::move(piece));
      start = i + 1;
    }
  }
  return out;
}

// Missing keys, nulls and empty strings are all "absent".
std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) return it->dump();
  auto s = trim(it->get<std::string>());
  if (s.empty()) return std::nullopt;
  return s;
}

std::string required_string(const json& obj, const char* key) {
  auto v = optional_string(obj, key);
  if (!v) throw ParseError(std::string("missing required field '") + key + "'");
  return *v;
}

void validate_collection(const std::vector<DebunkRecord>& records) {
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.id).second) throw ValidationError("duplicate record id \"" + r.id + "\"");
  }
}

}  // namespace

DebunkRecord record_from_json(const json& obj) {
  if (!obj.is_object()) throw ParseError("record is not a JSON object");
  DebunkRecord r;
  r.id = required_string(obj, "id");
  const auto date_text = required_string(obj, "debunk_date");
  auto date = parse_date(date_text);
  if (!date) throw ParseError("record \"" + r.id + "\": unparseable debunk_date \"" + date_text + "\"");
  r.debunk_date = *date;
  r.claim = optional_string(obj, "claim").value_or("");
  if (r.claim.empty()) throw ValidationError("record \"" + r.id + "\": empty claim");
  r.explanation = optional_string(obj, "explanation").value_or("");
  r.source_link = optional_string(obj, "source_link").value_or("");
  if (auto v = optional_string(obj, "veracity")) r.veracity = parse_veracity(*v);
  if (auto it = obj.find("platform"); it != obj.end()) {
    if (it->is_array()) {
      for (const auto& p : *it) {
        if (p.is_string() && !trim(p.get<std::string>()).empty()) r.platform.push_back(trim(p.get<std::string>()));
      }
    } else if (it->is_string()) {
      r.platform = split_platforms(it->get<std::string>());
    }
  }
  r.language = optional_string(obj, "language");
  if (auto v = optional_string(obj, "media_type")) r.media_type = parse_media_type(*v);
  if (auto v = optional_string(obj, "category")) r.category = parse_category(*v);
  return r;
}

nlohmann::ordered_json record_to_json(const DebunkRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["debunk_date"] = format_date(r.debunk_date);
  j["claim"] = r.claim;
  j["explanation"] = r.explanation;
  j["source_link"] = r.source_link;
  j["veracity"] = r.veracity ? json(std::string(to_string(*r.veracity))) : json(nullptr);
  j["platform"] = r.platform;
  j["language"] = r.language ? json(*r.language) : json(nullptr);
  j["media_type"] = r.media_type ? json(std::string(to_string(*r.media_type))) : json(nullptr);
  j["category"] = r.category ? json(std::string(to_string(*r.category))) : json(nullptr);
  return j;
}

std::vector<DebunkRecord> parse_debunks_jsonl(std::istream& in, const std::string& source) {
  std::vector<DebunkRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string locus = source + ":" + std::to_string(lineno) + ": ";
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(locus + e.what());
    }
    try {
      records.push_back(record_from_json(obj));
    } catch (const ParseError& e) {
      throw ParseError(locus + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(locus + e.what());
    }
  }
  validate_collection(records);
  return records;
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false, field_started = false;
  std::size_t lineno = 1;
  char ch;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  while (in.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++lineno;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !field.empty())
          throw ParseError(source + ":" + std::to_string(lineno) + ": stray quote inside unquoted field");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++lineno;
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError(source + ":" + std::to_string(lineno) + ": unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

std::vector<DebunkRecord> parse_debunks_csv(std::istream& in, const std::string& source) {
  auto rows = parse_csv(in, source);
  std::vector<DebunkRecord> records;
  if (rows.empty()) return records;
  const auto& header = rows.front();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string locus = source + ": record " + std::to_string(i) + ": ";
    if (rows[i].size() != header.size()) {
      throw ParseError(locus + "expected " + std::to_string(header.size()) + " fields, found " +
                       std::to_string(rows[i].size()));
    }
    json obj = json::object();
    for (std::size_t c = 0; c < header.size(); ++c) obj[trim(header[c])] = rows[i][c];
    try {
      records.push_back(record_from_json(obj));
    } catch (const ParseError& e) {
      throw ParseError(locus + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(locus + e.what());
    }
  }
  validate_collection(records);
  return records;
}

std::vector<DebunkRecord> load_debunks(const std::filesystem::path& path, RecordFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return format == RecordFormat::Csv ? parse_debunks_csv(in, path.string())
                                     : parse_debunks_jsonl(in, path.string());
}

void write_debunks_jsonl(std::ostream& out, std::span<const DebunkRecord> records) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<std::int32_t>(i)).second)
      throw ValidationError("duplicate vocabulary token \"" + tokens_[i] + "\"");
  }
}

std::optional<std::int32_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::int64_t BowVector::total() const {
  std::int64_t n = 0;
  for (const auto& e : entries) n += e.count;
  return n;
}

LabeledDocument make_document(DebunkRecord record, std::optional<Category> label) {
  LabeledDocument doc;
  doc.text = record.claim + " " + record.explanation;
  doc.label = label ? label : record.category;
  doc.record = std::move(record);
  doc.bow.doc_id = doc.record.id;
  return doc;
}

Vocabulary build_vocabulary(std::span<const std::string> texts, std::size_t max_size,
                            const text::StopwordSet& stopwords) {
  if (max_size < 1) throw ValidationError("vocabulary max_size must be >= 1");
  std::unordered_map<std::string, std::int64_t> freq;
  for (const auto& t : texts) {
    for (auto& tok : text::bow_tokens(t, stopwords)) ++freq[std::move(tok)];
  }
  if (freq.empty()) throw ValidationError("empty vocabulary: no token survives preprocessing");
  std::vector<std::pair<std::string, std::int64_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [tok, _] : ranked) tokens.push_back(std::move(tok));
  return Vocabulary(std::move(tokens));
}

Vocabulary build_vocabulary(std::span<const LabeledDocument> docs, std::size_t max_size,
                            const text::StopwordSet& stopwords) {
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& d : docs) texts.push_back(d.text);
  return build_vocabulary(texts, max_size, stopwords);
}

BowVector to_bow(std::string_view text, const Vocabulary& vocab, std::string doc_id) {
  if (vocab.empty()) throw ValidationError("to_bow requires a nonempty vocabulary");
  std::map<std::int32_t, std::int32_t> counts;
  for (const auto& w : text::split_words(text)) {
    if (auto idx = vocab.find(w)) ++counts[*idx];
  }
  BowVector bow;
  bow.doc_id = std::move(doc_id);
  bow.entries.reserve(counts.size());
  for (auto [i, c] : counts) bow.entries.push_back({i, c});
  return bow;
}

BowVector to_bow(const LabeledDocument& doc, const Vocabulary& vocab) {
  return to_bow(doc.text, vocab, doc.record.id);
}

void attach_bows(std::span<LabeledDocument> docs, const Vocabulary& vocab) {
  for (auto& d : docs) d.bow = to_bow(d, vocab);
}

std::vector<std::vector<std::size_t>> split_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("split_folds requires k >= 2");
  if (k > n) throw ValidationError("split_folds: k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " items");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

}  // namespace cantm::corpus
