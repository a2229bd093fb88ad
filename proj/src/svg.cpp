#include "asraudit/svg.hpp"

#include <array>
#include <cmath>
#include <cstdio>

namespace asraudit {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

}  // namespace

SvgWriter::SvgWriter(double width, double height) : width_(width), height_(height) {}

void SvgWriter::rect(double x, double y, double w, double h, std::string_view fill,
                     std::string_view stroke) {
  body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
           "\" height=\"" + num(h) + "\" fill=\"" + std::string(fill) + "\" stroke=\"" +
           std::string(stroke) + "\"/>\n";
}

void SvgWriter::line(double x1, double y1, double x2, double y2, std::string_view stroke,
                     double width) {
  body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
           "\" y2=\"" + num(y2) + "\" stroke=\"" + std::string(stroke) +
           "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void SvgWriter::circle(double cx, double cy, double r, std::string_view fill, double opacity) {
  body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
           "\" fill=\"" + std::string(fill) + "\" fill-opacity=\"" + num(opacity) + "\"/>\n";
}

void SvgWriter::arrow(double x1, double y1, double x2, double y2, std::string_view stroke) {
  line(x1, y1, x2, y2, stroke, 1.5);
  const double len = std::hypot(x2 - x1, y2 - y1);
  if (len < 1e-9) return;
  const double ux = (x2 - x1) / len, uy = (y2 - y1) / len;
  const double head = 7.0;
  const double bx = x2 - head * ux, by = y2 - head * uy;
  body_ += "<polygon points=\"" + num(x2) + "," + num(y2) + " " + num(bx - 3.5 * uy) + "," +
           num(by + 3.5 * ux) + " " + num(bx + 3.5 * uy) + "," + num(by - 3.5 * ux) +
           "\" fill=\"" + std::string(stroke) + "\"/>\n";
}

void SvgWriter::text(double x, double y, std::string_view content, double size,
                     std::string_view anchor, double rotate) {
  body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
           "\" text-anchor=\"" + std::string(anchor) + "\"";
  if (rotate != 0.0)
    body_ += " transform=\"rotate(" + num(rotate) + " " + num(x) + " " + num(y) + ")\"";
  body_ += ">" + xml_escape(content) + "</text>\n";
}

std::string SvgWriter::str() const {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" +
         num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) +
         "\" font-family=\"Helvetica, Arial, sans-serif\">\n" + body_ + "</svg>\n";
}

std::string_view decile_color(int decile) {
  // Light yellow to dark purple.
  static constexpr std::array<std::string_view, 10> ramp = {
      "#fcfdbf", "#feca8d", "#fd9668", "#f1605d", "#cd4071",
      "#9e2f7f", "#721f81", "#440f76", "#180f3d", "#000004"};
  const int i = decile < 1 ? 0 : decile > 10 ? 9 : decile - 1;
  return ramp[static_cast<std::size_t>(i)];
}

std::string_view category_color(std::size_t i) {
  static constexpr std::array<std::string_view, 8> palette = {
      "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return palette[i % palette.size()];
}

std::string xml_escape(std::string_view s) {
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

Ticks nice_ticks(double lo, double hi, int target) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : std::fabs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0) * mag;
  const double start = std::floor(lo / step) * step;
  const int count = static_cast<int>(std::ceil((hi - start) / step - 1e-9)) + 1;
  return {start, step, count};
}

}  // namespace asraudit
