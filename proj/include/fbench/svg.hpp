#pragma once

#include <string>
#include <vector>

#include "fbench/stats.hpp"

namespace fbench::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

/// Line chart with linear axes; output depends only on the inputs.
std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series);

struct Box {
  std::string label;
  GroupSummary summary;
};

/// Box plot: boxes span the quartiles, whiskers span min to max.
std::string box_chart(const std::string& title, const std::string& y_label, const std::vector<Box>& boxes);

void write_file(const std::string& path, const std::string& content);

}  // namespace fbench::svg
