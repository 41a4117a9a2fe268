#pragma once

#include <string>
#include <vector>

namespace sropkit::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Bare-bones line chart; x tick labels are optional.
std::string svg_line_chart(const std::string& title, const std::string& y_label,
                           const std::vector<Series>& series,
                           const std::vector<std::string>& x_ticks = {});

}  // namespace sropkit::cli
