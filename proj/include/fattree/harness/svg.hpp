#pragma once

#include <string>
#include <vector>

#include "fattree/harness/csv.hpp"

namespace fattree::harness {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // sorted by x
  bool dashed = false;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> groups;
  std::vector<std::string> series;
  std::vector<std::vector<double>> values;  // [group][series]
};

std::string render_svg(const LineChart& chart);
std::string render_svg(const BarChart& chart);

enum class PlotStyle { kAuto, kFlow, kLatency, kQueues };

PlotStyle parse_plot_style(const std::string& name);
std::string plot_style_name(PlotStyle style);
// Picks a style from the CSV columns; an empty table maps to kFlow.
PlotStyle detect_plot_style(const CsvTable& table);

// Renders one or more CSVs of the same schema.  Returns the written paths.
// Throws FormatError when a required column is missing.
std::vector<std::string> render_plots(const std::vector<std::string>& csv_paths,
                                      PlotStyle style, const std::string& out_dir);

}  // namespace fattree::harness
