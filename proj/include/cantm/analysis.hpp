#ifndef CANTM_ANALYSIS_HPP_
#define CANTM_ANALYSIS_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cantm/corpus.hpp"

namespace cantm::analysis {

using corpus::Date;

// Inclusive on both ends.
struct DateRange {
  Date first;
  Date last;
};

// The Sunday on or before d.
Date week_start(Date d);

struct TrendSeries {
  std::vector<Date> week_start;
  std::vector<long> counts;
  std::vector<double> normalized;  // 100 * count / max(count); all 0 when every count is 0
};

std::vector<double> normalize_to_peak(std::span<const long> counts);

// Weekly debunk counts over the range, one record counted once regardless of
// platform. Weeks are Sunday-aligned; weeks without records have count 0.
TrendSeries weekly_trend(std::span<const corpus::DebunkRecord> records, DateRange range);

// Smallest range covering every record's date.
DateRange record_span(std::span<const corpus::DebunkRecord> records);

struct SearchPoint {
  Date week;
  double value;
};

// Search-interest export: rows of "date,value"; rows whose first field is not
// a date (titles, headers, blanks) are skipped and "<1" reads as 0.
std::vector<SearchPoint> load_search_trend(const std::filesystem::path& path);
std::vector<SearchPoint> parse_search_trend(std::istream& in, const std::string& source = "<stream>");

std::string trend_csv(const TrendSeries& t);

enum class Dimension { Category, MediaType, Platform, Veracity, Language };

std::string_view to_string(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view s);

// The record's values along a dimension; empty when unset. Platform may hold
// several values.
std::vector<std::string> dimension_values(const corpus::DebunkRecord& r, Dimension d);

struct ValueCount {
  std::string value;
  long count = 0;
};

// Per-value record counts, one per value for multi-valued fields. Enum
// dimensions list every value in declaration order, zeros included; open
// dimensions list observed values by descending count, then name.
std::vector<ValueCount> value_counts(std::span<const corpus::DebunkRecord> records, Dimension d);

struct BreakdownTable {
  Dimension row_dim = Dimension::Category;
  Dimension col_dim = Dimension::Platform;
  std::vector<std::string> rows;
  std::vector<std::string> columns;  // last column is "All"
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> counts;
  Eigen::MatrixXd percent;  // each column sums to 100
  std::vector<long> row_totals;
  long included = 0;
  long excluded = 0;  // records unset in either dimension
  std::vector<std::string> omitted_columns;
};

inline constexpr std::string_view kAllColumn = "All";

// cell(r, c) = 100 * count(r, c) / count(., c). Multi-platform records count
// once per platform in the cells and once per row value in "All".
BreakdownTable stacked_breakdown(std::span<const corpus::DebunkRecord> records, Dimension row_dim, Dimension col_dim);

std::string breakdown_csv(const BreakdownTable& t, bool percentages = true);

}  // namespace cantm::analysis

#endif  // CANTM_ANALYSIS_HPP_
