#include "instboot/simplex_svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace instboot {

namespace {

constexpr double kSide = 600.0;
constexpr double kMargin = 60.0;
constexpr double kHeight = 519.6152422706632;  // side * sqrt(3) / 2

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Corner layout: defectors bottom-left, contributors bottom-right, monitors
// on top. Barycentric coordinates map affinely onto the triangle.
constexpr Point kCornerD{kMargin, kMargin + kHeight};
constexpr Point kCornerC{kMargin + kSide, kMargin + kHeight};
constexpr Point kCornerCM{kMargin + kSide / 2.0, kMargin};

Point project(double x_d, double x_c, double x_cm) {
  return {x_d * kCornerD.x + x_c * kCornerC.x + x_cm * kCornerCM.x,
          x_d * kCornerD.y + x_c * kCornerC.y + x_cm * kCornerCM.y};
}

// Drift vectors sum to zero across components, so the same projection maps
// them to in-plane displacements.
Point project_delta(const std::array<double, 3>& v) {
  return {v[0] * kCornerD.x + v[1] * kCornerC.x + v[2] * kCornerCM.x,
          v[0] * kCornerD.y + v[1] * kCornerC.y + v[2] * kCornerCM.y};
}

std::string fmt(double value) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, 3);
  if (res.ec != std::errc()) {
    throw std::runtime_error("render_simplex_svg: number formatting failed");
  }
  return std::string(buf, res.ptr);
}

}  // namespace

std::string render_simplex_svg(const GradientField& field,
                               const std::vector<FixedPoint>& fixed_points) {
  if (field.points.size() != field.vectors.size()) {
    throw std::domain_error(
        "render_simplex_svg: field points and vectors differ in size");
  }
  if (field.resolution < 1) {
    throw std::domain_error("render_simplex_svg: field resolution must be >= 1");
  }

  const double width = kSide + 2.0 * kMargin;
  const double height = kHeight + 2.0 * kMargin;
  const double cell = kSide / static_cast<double>(field.resolution);

  double max_len = 0.0;
  for (const auto& v : field.vectors) {
    const Point d = project_delta(v);
    max_len = std::max(max_len, std::hypot(d.x, d.y));
  }
  // Map the strongest drift to 90% of a cell spacing; everything longer than
  // one cell after scaling is capped so arrows never overlap neighbors.
  const double scale = max_len > 0.0 ? 0.9 * cell / max_len : 0.0;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) +
         "\" height=\"" + fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " +
         fmt(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<polygon points=\"" + fmt(kCornerD.x) + "," + fmt(kCornerD.y) + " " +
         fmt(kCornerC.x) + "," + fmt(kCornerC.y) + " " + fmt(kCornerCM.x) +
         "," + fmt(kCornerCM.y) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";

  svg += "<g stroke=\"#4477aa\" stroke-width=\"1\" fill=\"#4477aa\">\n";
  for (std::size_t i = 0; i < field.points.size(); ++i) {
    const auto& x = field.points[i];
    const Point from = project(x.x_d, x.x_c, x.x_cm);
    Point d = project_delta(field.vectors[i]);
    d.x *= scale;
    d.y *= scale;
    const double len = std::hypot(d.x, d.y);
    if (len > cell) {
      d.x *= cell / len;
      d.y *= cell / len;
    }
    const Point to{from.x + d.x, from.y + d.y};
    svg += "<line x1=\"" + fmt(from.x) + "\" y1=\"" + fmt(from.y) + "\" x2=\"" +
           fmt(to.x) + "\" y2=\"" + fmt(to.y) + "\"/>\n";
    // Arrowhead as a small triangle; degenerate drift keeps the (invisible)
    // zero-length head so every field point contributes one line + one head.
    const double head_len = std::min(len * 0.45, cell * 0.3);
    const double angle = std::atan2(d.y, d.x);
    const Point left{to.x - head_len * std::cos(angle - 0.45),
                     to.y - head_len * std::sin(angle - 0.45)};
    const Point right{to.x - head_len * std::cos(angle + 0.45),
                      to.y - head_len * std::sin(angle + 0.45)};
    svg += "<polygon points=\"" + fmt(to.x) + "," + fmt(to.y) + " " +
           fmt(left.x) + "," + fmt(left.y) + " " + fmt(right.x) + "," +
           fmt(right.y) + "\"/>\n";
  }
  svg += "</g>\n";

  for (const auto& fp : fixed_points) {
    const Point p = project(fp.location.x_d, fp.location.x_c, fp.location.x_cm);
    const bool filled = fp.stability == Stability::Stable;
    svg += "<circle cx=\"" + fmt(p.x) + "\" cy=\"" + fmt(p.y) +
           "\" r=\"6\" stroke=\"black\" stroke-width=\"1.5\" fill=\"" +
           (filled ? std::string("black") : std::string("white")) + "\"/>\n";
  }

  svg += "<g font-family=\"sans-serif\" font-size=\"20\" fill=\"#111111\">\n";
  svg += "<text x=\"" + fmt(kCornerD.x - 28.0) + "\" y=\"" +
         fmt(kCornerD.y + 26.0) + "\">D</text>\n";
  svg += "<text x=\"" + fmt(kCornerC.x + 8.0) + "\" y=\"" +
         fmt(kCornerC.y + 26.0) + "\">C</text>\n";
  svg += "<text x=\"" + fmt(kCornerCM.x - 18.0) + "\" y=\"" +
         fmt(kCornerCM.y - 12.0) + "\">CM</text>\n";
  svg += "</g>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace instboot
