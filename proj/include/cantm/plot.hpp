#ifndef CANTM_PLOT_HPP_
#define CANTM_PLOT_HPP_

#include <span>
#include <string>

#include "cantm/analysis.hpp"

namespace cantm::plot {

// Percentage-stacked column chart, one column per table column.
std::string stacked_columns_svg(const analysis::BreakdownTable& table, const std::string& title);

// Normalized weekly debunk counts, optionally overlaid with a search-interest
// series on the same 0-100 axis.
std::string trend_svg(const analysis::TrendSeries& trend, std::span<const analysis::SearchPoint> search,
                      const std::string& title);

}  // namespace cantm::plot

#endif  // CANTM_PLOT_HPP_
