#pragma once

#include "abspec/geometry.hpp"

namespace abspec::pred {

// Adaptive-precision predicates. The fast floating-point path is used when a
// forward error bound certifies the sign; otherwise the sign is recomputed
// with exact expansion arithmetic, so results are consistent for any input.

// > 0 if a,b,c are in counterclockwise order, < 0 clockwise, 0 collinear.
double orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

// > 0 if d lies strictly inside the circumcircle of the CCW triangle a,b,c.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

}  // namespace abspec::pred
