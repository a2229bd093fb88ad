#pragma once

#include <string>
#include <string_view>

namespace asraudit {

// Minimal SVG builder with fixed numeric formatting, so equal drawing calls
// produce equal bytes.
class SvgWriter {
 public:
  SvgWriter(double width, double height);

  void rect(double x, double y, double w, double h, std::string_view fill,
            std::string_view stroke = "none");
  void line(double x1, double y1, double x2, double y2, std::string_view stroke,
            double width = 1.0);
  void circle(double cx, double cy, double r, std::string_view fill,
              double opacity = 1.0);
  void arrow(double x1, double y1, double x2, double y2, std::string_view stroke);
  void text(double x, double y, std::string_view content, double size = 12.0,
            std::string_view anchor = "start", double rotate = 0.0);

  std::string str() const;

 private:
  std::string body_;
  double width_;
  double height_;
};

// 10-step sequential ramp, index 0 (light) .. 9 (dark).
std::string_view decile_color(int decile);
// Categorical palette, cycles after 8.
std::string_view category_color(std::size_t i);

std::string xml_escape(std::string_view s);

// Round tick positions covering [lo, hi].
struct Ticks {
  double start;
  double step;
  int count;
};
Ticks nice_ticks(double lo, double hi, int target = 5);

}  // namespace asraudit
