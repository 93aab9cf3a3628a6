#include "abspec/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace abspec {

namespace {

struct Rgb {
  double r, g, b;
};

// viridis, 11 stops
const Rgb kStops[11] = {
    {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
    {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
    {0.135, 0.659, 0.518}, {0.267, 0.749, 0.441}, {0.478, 0.821, 0.318},
    {0.741, 0.873, 0.150}, {0.993, 0.906, 0.144}};

std::string color_of(double t) {
  t = std::clamp(t, 0.0, 1.0);
  double pos = t * 10.0;
  int i = std::min(9, (int)pos);
  double f = pos - i;
  Rgb c{kStops[i].r + f * (kStops[i + 1].r - kStops[i].r),
        kStops[i].g + f * (kStops[i + 1].g - kStops[i].g),
        kStops[i].b + f * (kStops[i + 1].b - kStops[i].b)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", (int)(c.r * 255.0 + 0.5),
                (int)(c.g * 255.0 + 0.5), (int)(c.b * 255.0 + 0.5));
  return buf;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void write_heatmap_svg(std::ostream& os, const Domain& domain,
                       const std::vector<HeatCell>& cells,
                       const std::string& title) {
  double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300;
  for (const auto& s : domain.boundary()) {
    for (int i = 0; i <= 64; i++) {
      Vec2 q = s.at(i / 64.0);
      minx = std::min(minx, q.x);
      maxx = std::max(maxx, q.x);
      miny = std::min(miny, q.y);
      maxy = std::max(maxy, q.y);
    }
  }
  double pad = 0.05 * std::max(maxx - minx, maxy - miny);
  minx -= pad;
  maxx += pad;
  miny -= pad;
  maxy += pad;

  double vmin = 1e300, vmax = -1e300;
  for (const auto& c : cells) {
    vmin = std::min(vmin, c.value);
    vmax = std::max(vmax, c.value);
  }
  if (!(vmax > vmin)) vmax = vmin + 1.0;

  const double w = 640.0;
  double scale = w / (maxx - minx);
  double hgt = (maxy - miny) * scale;
  auto X = [&](double x) { return (x - minx) * scale; };
  auto Y = [&](double y) { return hgt - (y - miny) * scale; };  // y up

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w)
     << "\" height=\"" << fmt(hgt) << "\" viewBox=\"0 0 " << fmt(w) << " "
     << fmt(hgt) << "\">\n";
  os << "<title>" << title << "</title>\n";
  for (const auto& c : cells) {
    double t = (c.value - vmin) / (vmax - vmin);
    double half = 0.5 * c.size;
    os << "<rect x=\"" << fmt(X(c.x - half)) << "\" y=\""
       << fmt(Y(c.y + half)) << "\" width=\"" << fmt(c.size * scale)
       << "\" height=\"" << fmt(c.size * scale) << "\" fill=\""
       << color_of(t) << "\"/>\n";
  }
  // domain boundary: dark thick line on top
  os << "<path d=\"";
  bool first_piece = true;
  for (const auto& s : domain.boundary()) {
    int steps = s.kind == BoundarySegment::Kind::Arc ? 96 : 1;
    for (int i = 0; i <= steps; i++) {
      Vec2 q = s.at((double)i / steps);
      if (first_piece && i == 0)
        os << "M " << fmt(X(q.x)) << " " << fmt(Y(q.y)) << " ";
      else
        os << "L " << fmt(X(q.x)) << " " << fmt(Y(q.y)) << " ";
      first_piece = false;
    }
  }
  os << "Z\" fill=\"none\" stroke=\"#141414\" stroke-width=\"4\"/>\n";
  os << "</svg>\n";
}

}  // namespace abspec
