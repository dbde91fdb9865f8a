#include "cantm/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cantm/error.hpp"

namespace cantm::analysis {
namespace {

using std::chrono::days;
using std::chrono::sys_days;
using std::chrono::weekday;

std::vector<std::string> enum_values(Dimension d) {
  std::vector<std::string> out;
  switch (d) {
    case Dimension::Category:
      for (Category c : kAllCategories) out.emplace_back(to_string(c));
      break;
    case Dimension::MediaType:
      for (auto m : {MediaType::Text, MediaType::Image, MediaType::Video, MediaType::Audio, MediaType::NotClear})
        out.emplace_back(to_string(m));
      break;
    case Dimension::Veracity:
      for (auto v : {Veracity::False, Veracity::PartiallyFalse, Veracity::Misleading, Veracity::NoEvidence,
                     Veracity::Other})
        out.emplace_back(to_string(v));
      break;
    case Dimension::Platform:
    case Dimension::Language:
      break;
  }
  return out;
}

// Enum order when the dimension has one, else by descending count then name.
std::vector<std::string> ordered_values(Dimension d, const std::map<std::string, long>& totals) {
  auto declared = enum_values(d);
  if (!declared.empty()) return declared;
  std::vector<std::string> out;
  for (const auto& [v, _] : totals) out.push_back(v);
  std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return totals.at(a) > totals.at(b); });
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

Date week_start(Date d) {
  const sys_days day{d};
  return Date{day - (weekday{day} - weekday{0})};
}

std::vector<double> normalize_to_peak(std::span<const long> counts) {
  std::vector<double> out(counts.size(), 0.0);
  const long peak = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  if (peak <= 0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = counts[i] == peak ? 100.0 : 100.0 * static_cast<double>(counts[i]) / static_cast<double>(peak);
  }
  return out;
}

TrendSeries weekly_trend(std::span<const corpus::DebunkRecord> records, DateRange range) {
  if (!range.first.ok() || !range.last.ok()) throw ValidationError("trend range has an invalid date");
  if (sys_days{range.last} < sys_days{range.first}) {
    throw ValidationError("trend range is empty: " + corpus::format_date(range.first) + " is after " +
                          corpus::format_date(range.last));
  }
  const sys_days first{week_start(range.first)};
  const sys_days last{week_start(range.last)};
  TrendSeries t;
  for (sys_days w = first; w <= last; w += days{7}) t.week_start.push_back(Date{w});
  t.counts.assign(t.week_start.size(), 0);
  for (const auto& r : records) {
    const sys_days day{r.debunk_date};
    if (day < sys_days{range.first} || day > sys_days{range.last}) continue;
    const auto idx = (sys_days{week_start(r.debunk_date)} - first).count() / 7;
    ++t.counts[static_cast<std::size_t>(idx)];
  }
  t.normalized = normalize_to_peak(t.counts);
  return t;
}

DateRange record_span(std::span<const corpus::DebunkRecord> records) {
  if (records.empty()) throw ValidationError("no records to span");
  DateRange r{records.front().debunk_date, records.front().debunk_date};
  for (const auto& rec : records) {
    if (sys_days{rec.debunk_date} < sys_days{r.first}) r.first = rec.debunk_date;
    if (sys_days{rec.debunk_date} > sys_days{r.last}) r.last = rec.debunk_date;
  }
  return r;
}

std::vector<SearchPoint> parse_search_trend(std::istream& in, const std::string& source) {
  std::vector<SearchPoint> out;
  std::size_t line = 0;
  for (const auto& row : corpus::parse_csv(in, source)) {
    ++line;
    if (row.size() < 2) continue;
    const auto date = corpus::parse_date(row[0]);
    if (!date) continue;
    const std::string& v = row[1];
    if (v == "<1") {
      out.push_back({*date, 0.0});
      continue;
    }
    try {
      std::size_t used = 0;
      const double value = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      out.push_back({*date, value});
    } catch (const std::logic_error&) {
      throw ParseError(source + ":" + std::to_string(line) + ": bad search value \"" + v + "\"");
    }
  }
  return out;
}

std::vector<SearchPoint> load_search_trend(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_search_trend(in, path.string());
}

std::string trend_csv(const TrendSeries& t) {
  std::ostringstream out;
  out << "week_start,count,normalized\n";
  for (std::size_t i = 0; i < t.counts.size(); ++i) {
    out << corpus::format_date(t.week_start[i]) << ',' << t.counts[i] << ',' << fmt(t.normalized[i]) << '\n';
  }
  return out.str();
}

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::Category:
      return "category";
    case Dimension::MediaType:
      return "media_type";
    case Dimension::Platform:
      return "platform";
    case Dimension::Veracity:
      return "veracity";
    case Dimension::Language:
      return "language";
  }
  return "category";
}

std::optional<Dimension> parse_dimension(std::string_view s) {
  for (auto d : {Dimension::Category, Dimension::MediaType, Dimension::Platform, Dimension::Veracity,
                 Dimension::Language}) {
    if (s == to_string(d)) return d;
  }
  return std::nullopt;
}

std::vector<std::string> dimension_values(const corpus::DebunkRecord& r, Dimension d) {
  switch (d) {
    case Dimension::Category:
      if (r.category) return {std::string(to_string(*r.category))};
      return {};
    case Dimension::MediaType:
      if (r.media_type) return {std::string(to_string(*r.media_type))};
      return {};
    case Dimension::Veracity:
      if (r.veracity) return {std::string(to_string(*r.veracity))};
      return {};
    case Dimension::Language:
      if (r.language && !r.language->empty()) return {*r.language};
      return {};
    case Dimension::Platform: {
      std::vector<std::string> out;
      for (const auto& p : r.platform) {
        if (!p.empty() && std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
      }
      return out;
    }
  }
  return {};
}

std::vector<ValueCount> value_counts(std::span<const corpus::DebunkRecord> records, Dimension d) {
  std::map<std::string, long> totals;
  for (const auto& v : enum_values(d)) totals[v] = 0;
  for (const auto& r : records) {
    for (const auto& v : dimension_values(r, d)) ++totals[v];
  }
  std::vector<ValueCount> out;
  for (const auto& v : ordered_values(d, totals)) out.push_back({v, totals[v]});
  return out;
}

BreakdownTable stacked_breakdown(std::span<const corpus::DebunkRecord> records, Dimension row_dim, Dimension col_dim) {
  if (row_dim == col_dim) throw ValidationError("breakdown needs two different dimensions");
  std::map<std::pair<std::string, std::string>, long> cells;
  std::map<std::string, long> row_all, col_totals;
  BreakdownTable t;
  t.row_dim = row_dim;
  t.col_dim = col_dim;
  for (const auto& r : records) {
    const auto rv = dimension_values(r, row_dim);
    const auto cv = dimension_values(r, col_dim);
    if (rv.empty() || cv.empty()) {
      ++t.excluded;
      continue;
    }
    ++t.included;
    for (const auto& a : rv) {
      ++row_all[a];
      for (const auto& b : cv) {
        ++cells[{a, b}];
        ++col_totals[b];
      }
    }
  }

  for (const auto& v : ordered_values(row_dim, row_all)) {
    if (row_all.contains(v)) t.rows.push_back(v);
  }
  for (const auto& v : ordered_values(col_dim, col_totals)) {
    if (col_totals.contains(v)) {
      t.columns.push_back(v);
    } else {
      t.omitted_columns.push_back(v);
    }
  }
  t.columns.emplace_back(kAllColumn);

  const auto nr = static_cast<Eigen::Index>(t.rows.size());
  const auto nc = static_cast<Eigen::Index>(t.columns.size());
  t.counts.setZero(nr, nc);
  t.percent.setZero(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    const auto& a = t.rows[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k + 1 < nc; ++k) {
      auto it = cells.find({a, t.columns[static_cast<std::size_t>(k)]});
      if (it != cells.end()) t.counts(i, k) = it->second;
    }
    t.counts(i, nc - 1) = row_all[a];
    t.row_totals.push_back(t.counts.row(i).head(nc - 1).sum());
  }
  for (Eigen::Index k = 0; k < nc; ++k) {
    const double total = static_cast<double>(t.counts.col(k).sum());
    if (total > 0) t.percent.col(k) = t.counts.col(k).cast<double>() * (100.0 / total);
  }
  return t;
}

std::string breakdown_csv(const BreakdownTable& t, bool percentages) {
  std::ostringstream out;
  out << to_string(t.row_dim);
  for (const auto& c : t.columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    out << t.rows[i];
    for (std::size_t k = 0; k < t.columns.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(k);
      out << ',' << (percentages ? fmt(t.percent(r, c)) : std::to_string(t.counts(r, c)));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cantm::analysis
