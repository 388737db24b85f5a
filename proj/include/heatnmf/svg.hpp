#pragma once

#include <span>
#include <string>
#include <vector>

namespace heatnmf::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
};

/// Static line chart on a fixed 800x500 viewBox with axis ticks and a legend.
/// Output depends only on the inputs.
std::string line_plot(const PlotSpec& spec, std::span<const Series> series);

}  // namespace heatnmf::svg
