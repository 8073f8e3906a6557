#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace torus_stab::cli {

struct Series2D {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  bool markers = false;
};

/// Static SVG line plot. Non-finite points (and nonpositive ones on a log
/// axis) are skipped.
std::string render_svg(const PlotSpec& spec, const std::vector<Series2D>& series);

void write_svg(const std::filesystem::path& path, const PlotSpec& spec,
               const std::vector<Series2D>& series);

}  // namespace torus_stab::cli
