#include "runoff/chart.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "runoff/ingestion.hpp"

namespace runoff {

namespace {

constexpr double kWidth = 860;
constexpr double kHeight = 420;
constexpr double kLeft = 60;
constexpr double kRight = 220;
constexpr double kTop = 40;
constexpr double kBottom = 50;

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", v);
  return buffer;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::vector<Date>& dates,
                              const std::vector<ChartSeries>& series) {
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::vector<double> days;
  for (const Date& d : dates) {
    days.push_back(static_cast<double>(std::chrono::sys_days(d).time_since_epoch().count()));
  }
  const double first = days.empty() ? 0.0 : days.front();
  const double span = days.size() > 1 ? days.back() - first : 1.0;
  auto x_of = [&](std::size_t k) {
    return days.size() > 1 ? kLeft + (days[k] - first) / span * plot_w : kLeft + plot_w / 2;
  };
  auto y_of = [&](double p) { return kTop + (1.0 - p) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"22\" font-size=\"14\">" << escape(title) << "</text>\n";

  for (int tick = 0; tick <= 4; ++tick) {
    const double p = tick / 4.0;
    svg << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_w << "\" y1=\"" << num(y_of(p))
        << "\" y2=\"" << num(y_of(p)) << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y_of(p) + 4)
        << "\" text-anchor=\"end\">" << num(p) << "</text>\n";
  }
  for (std::size_t k = 0; k < dates.size(); ++k) {
    svg << "<text x=\"" << num(x_of(k)) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << format_date(dates[k]).substr(5) << "</text>\n";
  }
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = kPalette[s % std::size(kPalette)];
    std::string points;
    for (std::size_t k = 0; k < dates.size() && k < series[s].values.size(); ++k) {
      const double v = series[s].values[k];
      if (std::isnan(v)) continue;
      points += num(x_of(k)) + "," + num(y_of(v)) + " ";
    }
    if (!points.empty()) points.pop_back();
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\""
        << points << "\"/>\n";
    const double ly = kTop + 12 + 14.0 * static_cast<double>(s);
    svg << "<line x1=\"" << kLeft + plot_w + 12 << "\" x2=\"" << kLeft + plot_w + 30
        << "\" y1=\"" << num(ly - 4) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << colour
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w + 36 << "\" y=\"" << num(ly) << "\">"
        << escape(series[s].name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace runoff
