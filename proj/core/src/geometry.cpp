#include "abspec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "abspec/predicates.hpp"

namespace abspec {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double t) {
  // into [0, 2*pi)
  t = std::fmod(t, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  if (pred::orient2d(a, b, p) != 0.0) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
         p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

// Strict interior test for a simple CCW polygon; boundary points are out.
bool strictly_inside_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
  size_t n = poly.size();
  for (size_t i = 0; i < n; i++) {
    if (on_segment(p, poly[i], poly[(i + 1) % n])) return false;
  }
  bool in = false;
  for (size_t i = 0; i < n; i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if ((a.y > p.y) != (b.y > p.y)) {
      double o = pred::orient2d(a, b, p);
      if (b.y > a.y ? o > 0.0 : o < 0.0) in = !in;
    }
  }
  return in;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b,
                              Vec2* closest) {
  Vec2 d = b - a;
  double len2 = d.squared_norm();
  double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  Vec2 q = a + t * d;
  if (closest) *closest = q;
  return (p - q).norm();
}

double polygon_signed_area(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (size_t i = 0; i < poly.size(); i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    s += a.cross(b);
  }
  return 0.5 * s;
}

bool polygon_self_intersects(const std::vector<Vec2>& poly) {
  size_t n = poly.size();
  auto segments_cross = [](const Vec2& a, const Vec2& b, const Vec2& c,
                           const Vec2& d) {
    double o1 = pred::orient2d(a, b, c), o2 = pred::orient2d(a, b, d);
    double o3 = pred::orient2d(c, d, a), o4 = pred::orient2d(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 &&
           o2 != 0 && o3 != 0 && o4 != 0;
  };
  for (size_t i = 0; i < n; i++) {
    for (size_t j = i + 1; j < n; j++) {
      bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_cross(poly[i], poly[(i + 1) % n], poly[j],
                         poly[(j + 1) % n]))
        return true;
    }
  }
  return false;
}

}  // namespace

Vec2 BoundarySegment::at(double t) const {
  if (kind == Kind::Line) return a + t * (b - a);
  double ang = t0 + t * (t1 - t0);
  return {center.x + radius * std::cos(ang), center.y + radius * std::sin(ang)};
}

double BoundarySegment::length() const {
  if (kind == Kind::Line) return (b - a).norm();
  return radius * (t1 - t0);
}

Domain Domain::unit_square() {
  Domain d;
  d.kind_ = DomainKind::UnitSquare;
  d.vertices_ = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (size_t i = 0; i < 4; i++) {
    BoundarySegment s;
    s.kind = BoundarySegment::Kind::Line;
    s.a = d.vertices_[i];
    s.b = d.vertices_[(i + 1) % 4];
    d.boundary_.push_back(s);
  }
  d.char_length_ = 1.0;
  return d;
}

Domain Domain::unit_disk() {
  Domain d;
  d.kind_ = DomainKind::UnitDisk;
  d.radius_ = 1.0;
  BoundarySegment s;
  s.kind = BoundarySegment::Kind::Arc;
  s.center = {0, 0};
  s.radius = 1.0;
  s.t0 = 0.0;
  s.t1 = 2.0 * kPi;
  s.a = {1, 0};
  s.b = {1, 0};
  d.boundary_.push_back(s);
  d.char_length_ = 2.0;
  return d;
}

Domain Domain::sector(double aperture, double radius) {
  if (!(aperture > 0.0 && aperture < 2.0 * kPi))
    throw PreconditionError("sector aperture must lie in (0, 2*pi)");
  if (!(radius > 0.0)) throw PreconditionError("sector radius must be > 0");
  Domain d;
  d.kind_ = DomainKind::Sector;
  d.aperture_ = aperture;
  d.radius_ = radius;
  double half = aperture / 2.0;
  Vec2 lo{radius * std::cos(-half), radius * std::sin(-half)};
  Vec2 hi{radius * std::cos(half), radius * std::sin(half)};
  BoundarySegment e1;  // apex -> lower arc end
  e1.kind = BoundarySegment::Kind::Line;
  e1.a = {0, 0};
  e1.b = lo;
  BoundarySegment arc;  // CCW from -half to +half
  arc.kind = BoundarySegment::Kind::Arc;
  arc.center = {0, 0};
  arc.radius = radius;
  arc.t0 = -half;
  arc.t1 = half;
  arc.a = lo;
  arc.b = hi;
  BoundarySegment e2;  // upper arc end -> apex
  e2.kind = BoundarySegment::Kind::Line;
  e2.a = hi;
  e2.b = {0, 0};
  d.boundary_ = {e1, arc, e2};
  d.char_length_ = radius;
  return d;
}

Domain Domain::polygon(std::vector<Vec2> vertices) {
  if (vertices.size() < 3)
    throw PreconditionError("polygon needs at least 3 vertices");
  double area = polygon_signed_area(vertices);
  if (area <= 0.0)
    throw PreconditionError(
        "polygon vertices must be counterclockwise with positive area");
  if (polygon_self_intersects(vertices))
    throw PreconditionError("polygon boundary self-intersects");
  Domain d;
  d.kind_ = DomainKind::Polygon;
  d.vertices_ = std::move(vertices);
  for (size_t i = 0; i < d.vertices_.size(); i++) {
    BoundarySegment s;
    s.kind = BoundarySegment::Kind::Line;
    s.a = d.vertices_[i];
    s.b = d.vertices_[(i + 1) % d.vertices_.size()];
    d.boundary_.push_back(s);
  }
  double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300;
  for (const auto& v : d.vertices_) {
    minx = std::min(minx, v.x);
    maxx = std::max(maxx, v.x);
    miny = std::min(miny, v.y);
    maxy = std::max(maxy, v.y);
  }
  d.char_length_ = std::max(maxx - minx, maxy - miny);
  return d;
}

double Domain::area() const {
  switch (kind_) {
    case DomainKind::UnitSquare:
      return 1.0;
    case DomainKind::UnitDisk:
      return kPi * radius_ * radius_;
    case DomainKind::Sector:
      return 0.5 * aperture_ * radius_ * radius_;
    case DomainKind::Polygon:
      return polygon_signed_area(vertices_);
  }
  return 0.0;
}

bool Domain::contains(const Vec2& p) const {
  switch (kind_) {
    case DomainKind::UnitSquare:
      return p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0;
    case DomainKind::UnitDisk:
      return p.squared_norm() < radius_ * radius_;
    case DomainKind::Sector: {
      double r2 = p.squared_norm();
      if (!(r2 > 0.0 && r2 < radius_ * radius_)) return false;
      return std::fabs(std::atan2(p.y, p.x)) < aperture_ / 2.0;
    }
    case DomainKind::Polygon:
      return strictly_inside_polygon(vertices_, p);
  }
  return false;
}

double Domain::distance_to_boundary(const Vec2& p) const {
  double best = 1e300;
  for (const auto& s : boundary_) {
    if (s.kind == BoundarySegment::Kind::Line) {
      best = std::min(best, point_segment_distance(p, s.a, s.b, nullptr));
    } else {
      double r = (p - s.center).norm();
      double ang = std::atan2(p.y - s.center.y, p.x - s.center.x);
      double rel = wrap_angle(ang - s.t0);
      double span = s.t1 - s.t0;
      if (rel <= span || r == 0.0) {
        best = std::min(best, std::fabs(r - s.radius));
      } else {
        best = std::min(best, (p - s.at(0.0)).norm());
        best = std::min(best, (p - s.at(1.0)).norm());
      }
    }
  }
  return best;
}

std::vector<Vec2> Domain::nearest_boundary_points(const Vec2& p,
                                                  double tol) const {
  struct Cand {
    Vec2 q;
    double d;
  };
  std::vector<Cand> cands;
  for (const auto& s : boundary_) {
    if (s.kind == BoundarySegment::Kind::Line) {
      Vec2 q;
      double d = point_segment_distance(p, s.a, s.b, &q);
      cands.push_back({q, d});
    } else {
      double r = (p - s.center).norm();
      double ang = std::atan2(p.y - s.center.y, p.x - s.center.x);
      double rel = wrap_angle(ang - s.t0);
      double span = s.t1 - s.t0;
      if (r > 0.0 && rel <= span) {
        Vec2 q = {s.center.x + s.radius * std::cos(ang),
                  s.center.y + s.radius * std::sin(ang)};
        cands.push_back({q, std::fabs(r - s.radius)});
      }
      cands.push_back({s.at(0.0), (p - s.at(0.0)).norm()});
      cands.push_back({s.at(1.0), (p - s.at(1.0)).norm()});
    }
  }
  double dmin = 1e300;
  for (const auto& c : cands) dmin = std::min(dmin, c.d);
  std::vector<Vec2> out;
  for (const auto& c : cands) {
    if (c.d <= dmin + tol) {
      bool dup = false;
      for (const auto& q : out)
        if ((q - c.q).norm() <= tol) dup = true;
      if (!dup) out.push_back(c.q);
    }
  }
  return out;
}

std::vector<Vec2> Domain::corners() const {
  switch (kind_) {
    case DomainKind::UnitSquare:
    case DomainKind::Polygon:
      return vertices_;
    case DomainKind::UnitDisk:
      return {};
    case DomainKind::Sector: {
      double half = aperture_ / 2.0;
      return {{0, 0},
              {radius_ * std::cos(-half), radius_ * std::sin(-half)},
              {radius_ * std::cos(half), radius_ * std::sin(half)}};
    }
  }
  return {};
}

std::string Domain::describe() const {
  char buf[128];
  switch (kind_) {
    case DomainKind::UnitSquare:
      return "square";
    case DomainKind::UnitDisk:
      return "disk";
    case DomainKind::Sector:
      std::snprintf(buf, sizeof buf, "sector(%.17g,%.17g)", aperture_,
                    radius_);
      return buf;
    case DomainKind::Polygon: {
      std::ostringstream os;
      os << "polygon(";
      for (const auto& v : vertices_) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g;", v.x, v.y);
        os << buf;
      }
      os << ")";
      return os.str();
    }
  }
  return "?";
}

void Domain::validate() const {}

Pole::Pole(Vec2 pos, int num, int den) : position(pos) {
  if (num * 2 != den)
    throw PreconditionError(
        "only circulation 1/2 is supported (the double-cover identity needs "
        "a half-integer circulation)");
  circulation_num = num;
  circulation_den = den;
}

double Cut::length() const {
  double l = 0.0;
  for (size_t i = 0; i + 1 < path.size(); i++) l += (path[i + 1] - path[i]).norm();
  return l;
}

Domain build_domain(const DomainSpec& spec) {
  if (spec.kind == "square") return Domain::unit_square();
  if (spec.kind == "disk") return Domain::unit_disk();
  if (spec.kind == "sector") return Domain::sector(spec.aperture, spec.radius);
  if (spec.kind == "polygon") return Domain::polygon(spec.vertices);
  throw ConfigError("unknown domain kind '" + spec.kind +
                    "' (expected square|disk|sector|polygon)");
}

std::vector<Pole> pole_grid(const Domain& domain, int n) {
  if (n < 2) throw PreconditionError("pole grid needs N >= 2");
  // Bounding box of the domain, inflated to be safe.
  double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300;
  for (const auto& s : domain.boundary()) {
    for (int i = 0; i <= 16; i++) {
      Vec2 q = s.at(i / 16.0);
      minx = std::min(minx, q.x);
      maxx = std::max(maxx, q.x);
      miny = std::min(miny, q.y);
      maxy = std::max(maxy, q.y);
    }
  }
  std::vector<Pole> out;
  int m0 = (int)std::floor(minx * n) - 1, m1 = (int)std::ceil(maxx * n) + 1;
  int k0 = (int)std::floor(miny * n) - 1, k1 = (int)std::ceil(maxy * n) + 1;
  for (int m = m0; m <= m1; m++) {
    for (int k = k0; k <= k1; k++) {
      Vec2 p{double(m) / n, double(k) / n};
      if (domain.contains(p)) out.push_back(Pole(p));
    }
  }
  if (out.empty())
    throw PreconditionError("pole grid is empty: domain too small for N");
  return out;
}

Cut branch_cut(const Domain& domain, const Pole& pole) {
  if (!domain.contains(pole.position))
    throw PreconditionError("branch cut requires a strictly interior pole");
  double tol = 1e-12 * std::max(1.0, domain.char_length());
  auto cands = domain.nearest_boundary_points(pole.position, tol);
  // Smallest polar angle of the outward direction breaks ties. atan2 ranges
  // over (-pi, pi], so straight-down beats straight-right beats straight-up.
  Vec2 best = cands.front();
  double best_ang = (best - pole.position).angle();
  for (const auto& q : cands) {
    double a = (q - pole.position).angle();
    if (a < best_ang - 1e-15) {
      best = q;
      best_ang = a;
    }
  }
  Cut cut;
  cut.path = {pole.position, best};
  cut.anchor_rule = "nearest-boundary";
  validate_cut(domain, cut);
  return cut;
}

Cut branch_cut_to(const Domain& domain, const Pole& pole, const Vec2& anchor) {
  if (!domain.contains(pole.position))
    throw PreconditionError("branch cut requires a strictly interior pole");
  double tol = 1e-9 * std::max(1.0, domain.char_length());
  if (domain.distance_to_boundary(anchor) > tol)
    throw PreconditionError("cut anchor must lie on the domain boundary");
  Cut cut;
  cut.path = {pole.position, anchor};
  cut.anchor_rule = "explicit-anchor";
  validate_cut(domain, cut);
  return cut;
}

void validate_cut(const Domain& domain, const Cut& cut) {
  if (cut.path.size() < 2) throw PreconditionError("cut needs >= 2 vertices");
  if (!domain.contains(cut.path.front()))
    throw PreconditionError("cut must start at an interior pole");
  double tol = 1e-9 * std::max(1.0, domain.char_length());
  if (domain.distance_to_boundary(cut.path.back()) > tol)
    throw PreconditionError("cut must end on the domain boundary");
  for (size_t i = 1; i + 1 < cut.path.size(); i++) {
    if (!domain.contains(cut.path[i]))
      throw PreconditionError("cut interior vertices must be inside the domain");
  }
  // No self-intersection: consecutive-segment pairs only need endpoint checks;
  // for a straight two-point cut there is nothing else to test.
  for (size_t i = 0; i + 1 < cut.path.size(); i++) {
    for (size_t j = i + 2; j + 1 < cut.path.size(); j++) {
      const Vec2 &a = cut.path[i], &b = cut.path[i + 1];
      const Vec2 &c = cut.path[j], &d = cut.path[j + 1];
      double o1 = pred::orient2d(a, b, c), o2 = pred::orient2d(a, b, d);
      double o3 = pred::orient2d(c, d, a), o4 = pred::orient2d(c, d, b);
      if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)))
        throw PreconditionError("cut polyline self-intersects");
    }
  }
}

}  // namespace abspec
