#include "spectool/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "spectool/errors.hpp"

namespace spectool::render {
namespace {

constexpr std::array<const char*, 5> kRamp = {" ", "░", "▒", "▓", "█"};

std::string label(const std::vector<std::string>& labels, Index i, char prefix) {
  if (static_cast<std::size_t>(i) < labels.size()) return labels[static_cast<std::size_t>(i)];
  return std::string(1, prefix) + std::to_string(i + 1);
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Format parse_format(const std::string& name) {
  if (name == "text") return Format::Text;
  if (name == "svg") return Format::Svg;
  throw InputError("unknown render format '" + name + "' (expected text or svg)");
}

int shade_level(double value) {
  if (!(value > 0.0)) return 0;
  if (value >= 1.0) return 4;
  return std::clamp(static_cast<int>(std::floor(value * 5.0)), 0, 4);
}

std::string to_text(const Heatmap& map) {
  std::size_t width = 0;
  for (Index i = 0; i < map.values.rows(); ++i) width = std::max(width, label(map.row_labels, i, 'X').size());
  std::ostringstream out;
  if (!map.title.empty()) out << map.title << '\n';
  out << std::string(width, ' ') << " |";
  for (Index j = 0; j < map.values.cols(); ++j) out << (j + 1) % 10;
  out << "|\n";
  for (Index i = 0; i < map.values.rows(); ++i) {
    const std::string name = label(map.row_labels, i, 'X');
    out << name << std::string(width - name.size(), ' ') << " |";
    for (Index j = 0; j < map.values.cols(); ++j) out << kRamp[static_cast<std::size_t>(shade_level(map.values(i, j)))];
    out << "|\n";
  }
  out << "columns:";
  for (Index j = 0; j < map.values.cols(); ++j) out << ' ' << label(map.column_labels, j, 'Y');
  out << '\n';
  return out.str();
}

std::string to_svg(const Heatmap& map) {
  constexpr int cell = 28;
  constexpr int left = 80;
  constexpr int top = 48;
  const auto rows = static_cast<int>(map.values.rows());
  const auto cols = static_cast<int>(map.values.cols());
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + cols * cell + 10 << "\" height=\""
      << top + rows * cell + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  if (!map.title.empty()) out << "<text x=\"4\" y=\"14\">" << escape_xml(map.title) << "</text>\n";
  for (int j = 0; j < cols; ++j) {
    out << "<text x=\"" << left + j * cell + cell / 2 << "\" y=\"" << top - 6 << "\" text-anchor=\"middle\">"
        << escape_xml(label(map.column_labels, j, 'Y')) << "</text>\n";
  }
  char value[40];
  for (int i = 0; i < rows; ++i) {
    out << "<text x=\"" << left - 6 << "\" y=\"" << top + i * cell + cell / 2 + 4 << "\" text-anchor=\"end\">"
        << escape_xml(label(map.row_labels, i, 'X')) << "</text>\n";
    for (int j = 0; j < cols; ++j) {
      const double v = map.values(i, j);
      const double clamped = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
      const int grey = static_cast<int>(std::lround(255.0 * (1.0 - clamped)));
      std::snprintf(value, sizeof value, "%.17g", v);
      out << "<rect x=\"" << left + j * cell << "\" y=\"" << top + i * cell << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"rgb(" << grey << ',' << grey << ',' << grey
          << ")\" stroke=\"#999\"><title>" << escape_xml(label(map.row_labels, i, 'X')) << " -> "
          << escape_xml(label(map.column_labels, j, 'Y')) << ": " << value << "</title></rect>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string render(const Heatmap& map, Format format) {
  return format == Format::Svg ? to_svg(map) : to_text(map);
}

}  // namespace spectool::render
