#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "abspec/geometry.hpp"

namespace abspec {

struct HeatCell {
  double x, y;     // cell center
  double size;     // cell side
  double value;
};

// Piecewise-constant color map over grid cells; the domain boundary is drawn
// as a dark thick line on top. Output bytes are deterministic.
void write_heatmap_svg(std::ostream& os, const Domain& domain,
                       const std::vector<HeatCell>& cells,
                       const std::string& title);

}  // namespace abspec
