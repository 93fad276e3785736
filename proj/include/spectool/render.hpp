#pragma once

#include <string>
#include <vector>

#include "spectool/regression.hpp"

namespace spectool::render {

enum class Format { Text, Svg };

Format parse_format(const std::string& name);

struct Heatmap {
  std::string title;
  Matrix values;  // entries in [0, 1]; larger is darker
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;
};

/// One glyph per cell from a five-step ramp, " ░▒▓█", light to dark.
std::string to_text(const Heatmap& map);

/// Standalone SVG; every cell is a <rect> with a <title> holding its value.
std::string to_svg(const Heatmap& map);

std::string render(const Heatmap& map, Format format);

/// Ramp index in [0, 4] for a value in [0, 1]; values outside are clamped.
int shade_level(double value);

}  // namespace spectool::render
