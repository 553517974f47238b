#pragma once

// Minimal static SVG figures: line panels and heat-map panels laid out in a
// grid. No scripts, fonts or external references.

#include <optional>
#include <string>
#include <vector>

namespace bfsens::app::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // NaN breaks the polyline
  std::string color = "#000000";
  bool dashed = false;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct LinePanel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<Point> crosses;            // validation points
  std::optional<Point> anchor;           // filled circle
  std::optional<double> reference_line;  // horizontal
};

// Cells on a regular lattice, first coordinate slowest. NaN cells stay blank.
struct HeatPanel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  std::vector<double> values;
  bool diverging = false;  // centred at zero: red above, blue below
  std::optional<Point> anchor;
};

class Figure {
 public:
  explicit Figure(std::size_t columns) : columns_(columns) {}

  void add(LinePanel p) { panels_.push_back(Panel{std::move(p), {}, false}); }
  void add(HeatPanel p) { panels_.push_back(Panel{{}, std::move(p), true}); }
  // Reserves an empty slot in the grid.
  void skip() { panels_.push_back(Panel{{}, {}, false, true}); }

  std::string render() const;

 private:
  struct Panel {
    LinePanel line;
    HeatPanel heat;
    bool is_heat = false;
    bool empty = false;
  };
  std::size_t columns_;
  std::vector<Panel> panels_;
};

// Palette shared by the plotting subcommands.
const std::string& color_for(const std::string& method);

}  // namespace bfsens::app::svg
