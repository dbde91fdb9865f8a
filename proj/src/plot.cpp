#include "cantm/plot.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <sstream>

namespace cantm::plot {
namespace {

constexpr std::array<const char*, 12> kPalette = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
                                                  "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void open_svg(std::ostringstream& out, int w, int h, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
}

void y_axis(std::ostringstream& out, double left, double top, double height, double right) {
  for (int pct = 0; pct <= 100; pct += 25) {
    const double y = top + height * (1 - pct / 100.0);
    out << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(right) << "\" y2=\"" << num(y)
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << pct
        << "</text>\n";
  }
}

}  // namespace

std::string stacked_columns_svg(const analysis::BreakdownTable& table, const std::string& title) {
  const int ncols = static_cast<int>(table.columns.size());
  const double left = 50, top = 40, height = 300, col_w = 48, gap = 16;
  const double plot_w = ncols * (col_w + gap);
  const int legend_w = 170;
  const int w = static_cast<int>(left + plot_w + 20 + legend_w);
  const int h = static_cast<int>(top + height + 90);

  std::ostringstream out;
  open_svg(out, w, h, title);
  y_axis(out, left, top, height, left + plot_w);
  for (int k = 0; k < ncols; ++k) {
    const double x = left + gap / 2 + k * (col_w + gap);
    double y = top + height;
    for (Eigen::Index i = 0; i < table.percent.rows(); ++i) {
      const double hgt = height * table.percent(i, k) / 100.0;
      if (hgt <= 0) continue;
      y -= hgt;
      out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(col_w) << "\" height=\""
          << num(hgt) << "\" fill=\"" << kPalette[static_cast<std::size_t>(i) % kPalette.size()] << "\"><title>"
          << escape(table.rows[static_cast<std::size_t>(i)]) << ": " << num(table.percent(i, k))
          << "%</title></rect>\n";
    }
    const double lx = x + col_w / 2, ly = top + height + 12;
    out << "<text x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" text-anchor=\"end\" transform=\"rotate(-40 "
        << num(lx) << ' ' << num(ly) << ")\">" << escape(table.columns[static_cast<std::size_t>(k)]) << "</text>\n";
  }
  const double lx = left + plot_w + 20;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double ly = top + 14.0 * static_cast<double>(i);
    out << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" width=\"10\" height=\"10\" fill=\""
        << kPalette[i % kPalette.size()] << "\"/>\n";
    out << "<text x=\"" << num(lx + 14) << "\" y=\"" << num(ly + 9) << "\">" << escape(table.rows[i]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string trend_svg(const analysis::TrendSeries& trend, std::span<const analysis::SearchPoint> search,
                      const std::string& title) {
  using std::chrono::sys_days;
  const double left = 50, top = 40, height = 300, width = 640;
  const int w = static_cast<int>(left + width + 30);
  const int h = static_cast<int>(top + height + 80);

  std::ostringstream out;
  open_svg(out, w, h, title);
  y_axis(out, left, top, height, left + width);
  if (trend.week_start.empty()) {
    out << "</svg>\n";
    return out.str();
  }
  const double t0 = static_cast<double>(sys_days{trend.week_start.front()}.time_since_epoch().count());
  const double t1 = static_cast<double>(sys_days{trend.week_start.back()}.time_since_epoch().count());
  const double span = t1 > t0 ? t1 - t0 : 1;
  auto x_of = [&](analysis::Date d) {
    const double t = static_cast<double>(sys_days{d}.time_since_epoch().count());
    return left + width * (t - t0) / span;
  };
  auto y_of = [&](double v) { return top + height * (1 - v / 100.0); };

  auto polyline = [&](const std::vector<std::pair<double, double>>& pts, const char* colour) {
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts) out << num(x) << ',' << num(y) << ' ';
    out << "\"/>\n";
  };

  std::vector<std::pair<double, double>> debunks;
  for (std::size_t i = 0; i < trend.week_start.size(); ++i) {
    debunks.emplace_back(x_of(trend.week_start[i]), y_of(trend.normalized[i]));
  }
  polyline(debunks, kPalette[0]);

  std::vector<std::pair<double, double>> interest;
  for (const auto& p : search) {
    if (sys_days{p.week} < sys_days{trend.week_start.front()} || sys_days{p.week} > sys_days{trend.week_start.back()})
      continue;
    interest.emplace_back(x_of(p.week), y_of(std::clamp(p.value, 0.0, 100.0)));
  }
  if (!interest.empty()) polyline(interest, kPalette[1]);

  const std::size_t step = std::max<std::size_t>(1, trend.week_start.size() / 8);
  for (std::size_t i = 0; i < trend.week_start.size(); i += step) {
    const double x = x_of(trend.week_start[i]), y = top + height + 14;
    out << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"end\" transform=\"rotate(-30 " << num(x)
        << ' ' << num(y) << ")\">" << corpus::format_date(trend.week_start[i]) << "</text>\n";
  }
  out << "<text x=\"" << num(left + 10) << "\" y=\"" << num(top + 12) << "\" fill=\"" << kPalette[0]
      << "\">debunks</text>\n";
  if (!interest.empty()) {
    out << "<text x=\"" << num(left + 80) << "\" y=\"" << num(top + 12) << "\" fill=\"" << kPalette[1]
        << "\">search interest</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace cantm::plot
