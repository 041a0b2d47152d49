#pragma once

#include <string>
#include <vector>

namespace coachsim::plot {

/// Minimal deterministic SVG bar chart: same inputs, same bytes.
std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values);

void write_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                     const std::vector<double>& values, const std::string& path);

/// Grouped bars (one group per label, one bar per series).
std::string grouped_bar_chart_svg(const std::string& title, const std::vector<std::string>& labels,
                                  const std::vector<std::string>& series_names,
                                  const std::vector<std::vector<double>>& series_values);

void write_grouped_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                             const std::vector<std::string>& series_names,
                             const std::vector<std::vector<double>>& series_values,
                             const std::string& path);

}  // namespace coachsim::plot
