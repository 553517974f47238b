#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace bfsens::app::svg {

namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 320.0;
constexpr double kLeft = 62.0;
constexpr double kRight = 16.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 46.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Range {
  double lo = INFINITY;
  double hi = -INFINITY;

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    const double pad = 0.04 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

struct Frame {
  double ox, oy;  // panel origin
  Range xr, yr;

  double px(double x) const { return ox + kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kPanelW - kLeft - kRight); }
  double py(double y) const { return oy + kPanelH - kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kPanelH - kTop - kBottom); }
};

void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xl,
          const std::string& yl) {
  const double x0 = f.ox + kLeft, x1 = f.ox + kPanelW - kRight;
  const double y0 = f.oy + kTop, y1 = f.oy + kPanelH - kBottom;
  os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0) << "\" height=\""
     << num(y1 - y0) << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  for (double t : ticks(f.xr.lo, f.xr.hi)) {
    const double x = f.px(t);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x) << "\" y2=\"" << num(y1 + 4)
       << "\" stroke=\"#444444\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << num(y1 + 16) << "\" font-size=\"10\" text-anchor=\"middle\">"
       << tick_label(t) << "</text>\n";
  }
  for (double t : ticks(f.yr.lo, f.yr.hi)) {
    const double y = f.py(t);
    os << "<line x1=\"" << num(x0 - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(y)
       << "\" stroke=\"#444444\"/>\n";
    os << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y + 3) << "\" font-size=\"10\" text-anchor=\"end\">"
       << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(f.oy + 18) << "\" font-size=\"13\" text-anchor=\"middle\">"
     << escape(title) << "</text>\n";
  os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(y1 + 34) << "\" font-size=\"11\" text-anchor=\"middle\">"
     << escape(xl) << "</text>\n";
  os << "<text x=\"" << num(f.ox + 14) << "\" y=\"" << num((y0 + y1) / 2) << "\" font-size=\"11\" text-anchor=\"middle\""
     << " transform=\"rotate(-90 " << num(f.ox + 14) << ' ' << num((y0 + y1) / 2) << ")\">" << escape(yl)
     << "</text>\n";
}

void anchor_marker(std::ostringstream& os, const Frame& f, const Point& p) {
  os << "<circle cx=\"" << num(f.px(p.x)) << "\" cy=\"" << num(f.py(p.y)) << "\" r=\"4\" fill=\"#000000\"/>\n";
}

void render_line(std::ostringstream& os, const LinePanel& p, double ox, double oy) {
  Frame f{ox, oy, {}, {}};
  for (const auto& s : p.series) {
    for (double v : s.x) f.xr.add(v);
    for (double v : s.y) f.yr.add(v);
  }
  for (const auto& c : p.crosses) f.xr.add(c.x), f.yr.add(c.y);
  if (p.anchor) f.xr.add(p.anchor->x), f.yr.add(p.anchor->y);
  if (p.reference_line) f.yr.add(*p.reference_line);
  f.xr.finish();
  f.yr.finish();
  axes(os, f, p.title, p.x_label, p.y_label);
  if (p.reference_line)
    os << "<line x1=\"" << num(f.px(f.xr.lo)) << "\" y1=\"" << num(f.py(*p.reference_line)) << "\" x2=\""
       << num(f.px(f.xr.hi)) << "\" y2=\"" << num(f.py(*p.reference_line)) << "\" stroke=\"#999999\"/>\n";
  for (const auto& s : p.series) {
    std::string pts;
    auto flush = [&] {
      if (!pts.empty())
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\""
           << (s.dashed ? " stroke-dasharray=\"3 3\"" : "") << " points=\"" << pts << "\"/>\n";
      pts.clear();
    };
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      pts += (pts.empty() ? "" : " ") + num(f.px(s.x[i])) + "," + num(f.py(s.y[i]));
    }
    flush();
  }
  for (const auto& c : p.crosses) {
    const double x = f.px(c.x), y = f.py(c.y);
    os << "<path d=\"M" << num(x - 4) << ' ' << num(y - 4) << "L" << num(x + 4) << ' ' << num(y + 4) << "M"
       << num(x - 4) << ' ' << num(y + 4) << "L" << num(x + 4) << ' ' << num(y - 4)
       << "\" stroke=\"#000000\" stroke-width=\"1.4\"/>\n";
  }
  if (p.anchor) anchor_marker(os, f, *p.anchor);
  // Legend.
  double ly = oy + kTop + 12;
  for (const auto& s : p.series) {
    const double lx = ox + kPanelW - kRight - 110;
    os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 3) << "\" x2=\"" << num(lx + 18) << "\" y2=\""
       << num(ly - 3) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
       << (s.dashed ? " stroke-dasharray=\"3 3\"" : "") << "/>\n";
    os << "<text x=\"" << num(lx + 22) << "\" y=\"" << num(ly) << "\" font-size=\"10\">" << escape(s.label)
       << "</text>\n";
    ly += 14;
  }
}

std::string heat_color(double v, double lo, double hi, bool diverging) {
  double t;
  int r, g, b;
  if (diverging) {
    const double m = std::max(std::abs(lo), std::abs(hi));
    t = m > 0 ? std::clamp(v / m, -1.0, 1.0) : 0.0;
    if (t >= 0) {
      r = 255, g = static_cast<int>(255 * (1 - t)), b = static_cast<int>(255 * (1 - t));
    } else {
      r = static_cast<int>(255 * (1 + t)), g = static_cast<int>(255 * (1 + t)), b = 255;
    }
  } else {
    t = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.5;
    r = static_cast<int>(30 + 225 * t);
    g = static_cast<int>(40 + 170 * t);
    b = static_cast<int>(110 + 60 * (1 - t));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

void render_heat(std::ostringstream& os, const HeatPanel& p, double ox, double oy) {
  Frame f{ox, oy, {p.x0, p.x1}, {p.y0, p.y1}};
  const double dx = p.nx > 1 ? (p.x1 - p.x0) / static_cast<double>(p.nx - 1) : 1.0;
  const double dy = p.ny > 1 ? (p.y1 - p.y0) / static_cast<double>(p.ny - 1) : 1.0;
  f.xr = {p.x0 - dx / 2, p.x1 + dx / 2};
  f.yr = {p.y0 - dy / 2, p.y1 + dy / 2};
  Range vr;
  for (double v : p.values) vr.add(v);
  for (std::size_t i = 0; i < p.nx; ++i)
    for (std::size_t j = 0; j < p.ny; ++j) {
      const double v = p.values[i * p.ny + j];
      if (!std::isfinite(v)) continue;
      const double x = p.x0 + dx * static_cast<double>(i), y = p.y0 + dy * static_cast<double>(j);
      const double px0 = f.px(x - dx / 2), px1 = f.px(x + dx / 2);
      const double py0 = f.py(y + dy / 2), py1 = f.py(y - dy / 2);
      os << "<rect x=\"" << num(px0) << "\" y=\"" << num(py0) << "\" width=\"" << num(px1 - px0 + 0.3)
         << "\" height=\"" << num(py1 - py0 + 0.3) << "\" fill=\"" << heat_color(v, vr.lo, vr.hi, p.diverging)
         << "\"/>\n";
    }
  axes(os, f, p.title, p.x_label, p.y_label);
  if (p.anchor) anchor_marker(os, f, *p.anchor);
  if (std::isfinite(vr.lo))
    os << "<text x=\"" << num(ox + kPanelW - kRight) << "\" y=\"" << num(oy + kPanelH - 6)
       << "\" font-size=\"9\" text-anchor=\"end\">range " << tick_label(vr.lo) << " to " << tick_label(vr.hi)
       << "</text>\n";
}

}  // namespace

std::string Figure::render() const {
  const std::size_t rows = (panels_.size() + columns_ - 1) / columns_;
  const double w = kPanelW * static_cast<double>(columns_);
  const double h = kPanelH * static_cast<double>(std::max<std::size_t>(rows, 1));
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (std::size_t k = 0; k < panels_.size(); ++k) {
    const double ox = kPanelW * static_cast<double>(k % columns_);
    const double oy = kPanelH * static_cast<double>(k / columns_);
    const Panel& p = panels_[k];
    if (p.empty) continue;
    if (p.is_heat)
      render_heat(os, p.heat, ox, oy);
    else
      render_line(os, p.line, ox, oy);
  }
  os << "</svg>\n";
  return os.str();
}

const std::string& color_for(const std::string& method) {
  static const std::map<std::string, std::string> palette = {
      {"exact", "#000000"},        {"kde", "#d95f02"},     {"iwmde", "#1b9e77"},
      {"iwmde-conditional", "#7570b3"}, {"cmde", "#e7298a"}, {"trunc-normal", "#66a61e"},
  };
  static const std::string fallback = "#555555";
  const auto colon = method.rfind(':');
  const auto it = palette.find(colon == std::string::npos ? method : method.substr(colon + 1));
  return it == palette.end() ? fallback : it->second;
}

}  // namespace bfsens::app::svg
