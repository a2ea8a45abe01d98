#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lifespan {

/// %.12g, with "inf", "-inf" and "nan" spelled out.
std::string format_real(double v);

/// Writes the whole file or throws std::runtime_error naming the path.
void write_text_file(const std::filesystem::path& path, std::string_view content);

struct PlotPoint {
  double x, y;
};

/// y = intercept + slope * x over the plotted x range.
struct PlotLine {
  double slope, intercept;
};

/// Self-contained SVG scatter plot. Output depends only on the arguments.
std::string svg_scatter(const std::vector<PlotPoint>& points, const std::optional<PlotLine>& line,
                        std::string_view x_label, std::string_view y_label, std::string_view title);

}  // namespace lifespan
