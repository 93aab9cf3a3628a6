#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "abspec/errors.hpp"

namespace abspec {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
  Vec2 normalized() const {
    double n = norm();
    return {x / n, y / n};
  }
  double angle() const { return std::atan2(y, x); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

enum class DomainKind { UnitSquare, UnitDisk, Sector, Polygon };

// Boundary pieces carry an analytic parametrization: straight segments
// and CCW circular arcs (used by the disk and the sector).
struct BoundarySegment {
  enum class Kind { Line, Arc };
  Kind kind = Kind::Line;
  Vec2 a, b;            // endpoints (for arcs, computed from angles)
  Vec2 center;          // arc only
  double radius = 0.0;  // arc only
  double t0 = 0.0, t1 = 0.0;  // arc angle range, CCW, t1 > t0

  Vec2 at(double t) const;  // t in [0,1]
  double length() const;
};

// A simply connected bounded planar domain. The boundary is traversed CCW.
class Domain {
 public:
  static Domain unit_square();
  static Domain unit_disk();
  static Domain sector(double aperture, double radius);
  static Domain polygon(std::vector<Vec2> vertices);  // CCW, positive area

  DomainKind kind() const { return kind_; }
  const std::vector<BoundarySegment>& boundary() const { return boundary_; }
  double area() const;
  double char_length() const { return char_length_; }
  double aperture() const { return aperture_; }
  double radius() const { return radius_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }

  // Strict interior test (points on the boundary are outside).
  bool contains(const Vec2& p) const;
  double distance_to_boundary(const Vec2& p) const;
  // Closest boundary point; calls out all candidates tied within tol so the
  // cut construction can apply its angle tie-break.
  std::vector<Vec2> nearest_boundary_points(const Vec2& p, double tol) const;
  // Corner vertices of the boundary (square/polygon corners, sector apex and
  // arc junctions). Mesh generation keeps these as fixed feature points.
  std::vector<Vec2> corners() const;

  std::string describe() const;

 private:
  Domain() = default;
  void validate() const;

  DomainKind kind_ = DomainKind::UnitSquare;
  std::vector<BoundarySegment> boundary_;
  std::vector<Vec2> vertices_;  // polygon path (square/polygon)
  double aperture_ = 0.0;       // sector
  double radius_ = 0.0;         // disk/sector
  double char_length_ = 1.0;
};

// Singular point of the operator together with its circulation. Only the
// half-integer case is representable; other circulations are rejected.
struct Pole {
  Vec2 position;
  int circulation_num = 1;
  int circulation_den = 2;

  Pole() = default;
  Pole(Vec2 pos) : position(pos) {}
  Pole(Vec2 pos, int num, int den);
};

// Polyline from the pole to a boundary point across which the single-sheet
// representative of an antisymmetric eigenfunction changes sign.
struct Cut {
  std::vector<Vec2> path;  // path.front() == pole, path.back() on boundary
  std::string anchor_rule;

  const Vec2& pole() const { return path.front(); }
  const Vec2& boundary_end() const { return path.back(); }
  double length() const;
};

// Descriptor-driven construction, used by the config front end.
struct DomainSpec {
  std::string kind;  // "square" | "disk" | "sector" | "polygon"
  double aperture = 0.0;
  double radius = 1.0;
  std::vector<Vec2> vertices;
};

Domain build_domain(const DomainSpec& spec);

// All lattice points (m/N, n/N) strictly interior to the domain, in
// lexicographic (x, then y) order.
std::vector<Pole> pole_grid(const Domain& domain, int n);

// Straight cut from the pole to the nearest boundary point; ties broken by
// the smallest polar angle of the outward direction.
Cut branch_cut(const Domain& domain, const Pole& pole);

// Cut to a caller-chosen boundary anchor (used by the gauge-invariance
// checks, which compare two admissible cuts for the same pole).
Cut branch_cut_to(const Domain& domain, const Pole& pole, const Vec2& anchor);

void validate_cut(const Domain& domain, const Cut& cut);

}  // namespace abspec
