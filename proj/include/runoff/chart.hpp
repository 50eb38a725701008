#pragma once

#include <string>
#include <vector>

#include "runoff/model.hpp"

namespace runoff {

struct ChartSeries {
  std::string name;
  /// One value in [0, 1] per chart date; NaN leaves a gap.
  std::vector<double> values;
};

/// Standalone SVG line chart of probability series over dates. The x axis is
/// proportional to calendar days; the y axis spans [0, 1].
std::string render_line_chart(const std::string& title, const std::vector<Date>& dates,
                              const std::vector<ChartSeries>& series);

}  // namespace runoff
