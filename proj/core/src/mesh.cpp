#include "abspec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <cstdlib>
#include <deque>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "abspec/predicates.hpp"

namespace abspec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRadiusFactor = 0.7;  // split when circumradius > factor*size

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * (b - a).cross(c - a);
}

double tri_min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
  double la = (c - b).norm(), lb = (a - c).norm(), lc = (b - a).norm();
  auto ang = [](double opp, double s1, double s2) {
    double cosv = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
    return std::acos(std::clamp(cosv, -1.0, 1.0));
  };
  double aa = ang(la, lb, lc), ab = ang(lb, lc, la), ac = ang(lc, la, lb);
  return std::min({aa, ab, ac}) * 180.0 / kPi;
}

// Circumcenter relative to a; returns false when nearly degenerate.
bool circumcenter(const Vec2& a, const Vec2& b, const Vec2& c, Vec2& cc,
                  double& radius) {
  Vec2 u = b - a, v = c - a;
  double d = 2.0 * u.cross(v);
  double scale = u.squared_norm() + v.squared_norm();
  if (std::fabs(d) < 1e-14 * scale) return false;
  double uu = u.squared_norm(), vv = v.squared_norm();
  double ux = (v.y * uu - u.y * vv) / d;
  double uy = (u.x * vv - v.x * uu) / d;
  cc = {a.x + ux, a.y + uy};
  radius = std::hypot(ux, uy);
  return true;
}

double wrap2pi(double t) {
  t = std::fmod(t, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

// ---------------------------------------------------------------------------
// Incremental Delaunay triangulation (Bowyer-Watson) with exact predicates.

class Delaunay {
 public:
  struct DTri {
    std::array<int, 3> v;
    std::array<int, 3> n;  // neighbor across edge opposite v[i]
    bool alive = true;
  };

  std::vector<Vec2> pts;
  std::vector<DTri> tris;
  std::vector<int> vert2tri;
  std::vector<int> last_star;  // triangles created by the last insertion
  int last_tri = 0;

  Delaunay(const Vec2& lo, const Vec2& hi) {
    Vec2 c = (lo + hi) * 0.5;
    double ext = std::max({hi.x - lo.x, hi.y - lo.y, 1e-6});
    double r = 64.0 * ext;
    pts.push_back({c.x - 2.0 * r, c.y - r});
    pts.push_back({c.x + 2.0 * r, c.y - r});
    pts.push_back({c.x, c.y + 2.0 * r});
    tris.push_back({{0, 1, 2}, {-1, -1, -1}, true});
    vert2tri = {0, 0, 0};
  }

  bool is_super(int v) const { return v < 3; }

  // Visibility walk. Returns the containing triangle; fills the three edge
  // orientations (>=0 means p is inside or on that edge).
  int locate(const Vec2& p, int hint, std::array<double, 3>& orient) const {
    int t = hint;
    if (t < 0 || t >= (int)tris.size() || !tris[t].alive) {
      t = -1;
      for (int i = (int)tris.size() - 1; i >= 0; i--) {
        if (tris[i].alive) {
          t = i;
          break;
        }
      }
    }
    int came_from = -1;
    std::size_t guard = 4 * tris.size() + 64;
    while (guard--) {
      const DTri& tri = tris[t];
      int next = -1;
      for (int i = 0; i < 3; i++) {
        const Vec2& ea = pts[tri.v[(i + 1) % 3]];
        const Vec2& eb = pts[tri.v[(i + 2) % 3]];
        orient[i] = pred::orient2d(ea, eb, p);
        if (orient[i] < 0.0 && tri.n[i] != came_from && next == -1)
          next = i;
      }
      if (next == -1) {
        // re-check: possibly only the came_from edge is negative
        for (int i = 0; i < 3; i++)
          if (orient[i] < 0.0) next = i;
        if (next == -1) return t;
      }
      int nt = tri.n[next];
      if (nt < 0)
        throw NumericalError("mesh: point located outside the triangulation");
      came_from = t;
      t = nt;
    }
    throw NumericalError("mesh: point location walk did not terminate");
  }

  // Cavity of p: the triangles whose open circumdisk contains p. Returns
  // empty when p coincides with an existing vertex (sets *dup if given).
  std::vector<int> cavity_of(const Vec2& p, int hint, int* dup = nullptr) const {
    std::array<double, 3> o;
    int t0 = locate(p, hint < 0 ? last_tri : hint, o);
    if (dup) *dup = -1;
    int zeros = 0, zi = -1, zj = -1;
    for (int i = 0; i < 3; i++) {
      if (o[i] == 0.0) {
        zeros++;
        if (zi < 0)
          zi = i;
        else
          zj = i;
      }
    }
    if (zeros >= 2) {
      if (dup) *dup = tris[t0].v[3 - zi - zj];
      return {};
    }
    std::vector<int> cavity;
    std::unordered_set<int> in_cavity;
    std::vector<int> stack{t0};
    in_cavity.insert(t0);
    while (!stack.empty()) {
      int t = stack.back();
      stack.pop_back();
      cavity.push_back(t);
      for (int i = 0; i < 3; i++) {
        int nb = tris[t].n[i];
        if (nb < 0 || in_cavity.count(nb)) continue;
        const DTri& ntri = tris[nb];
        if (pred::incircle(pts[ntri.v[0]], pts[ntri.v[1]], pts[ntri.v[2]],
                           p) > 0.0) {
          in_cavity.insert(nb);
          stack.push_back(nb);
        }
      }
    }
    return cavity;
  }

  // Inserts p; returns its vertex id, or the id of a coincident existing
  // vertex. Populates last_star with the new triangles.
  int insert(const Vec2& p, int hint = -1) {
    int dup = -1;
    std::vector<int> cavity = cavity_of(p, hint, &dup);
    if (dup >= 0) return dup;
    std::unordered_set<int> in_cavity(cavity.begin(), cavity.end());

    // Boundary loop of the cavity, interior on the left of each (a,b).
    struct BEdge {
      int b;
      int outer;
    };
    std::unordered_map<int, BEdge> loop;  // a -> (b, outer tri)
    for (int t : cavity) {
      for (int i = 0; i < 3; i++) {
        int nb = tris[t].n[i];
        if (nb >= 0 && in_cavity.count(nb)) continue;
        int a = tris[t].v[(i + 1) % 3];
        int b = tris[t].v[(i + 2) % 3];
        if (!loop.emplace(a, BEdge{b, nb}).second)
          throw NumericalError("mesh: cavity boundary is not a simple loop");
      }
    }

    int vid = (int)pts.size();
    pts.push_back(p);
    vert2tri.push_back(-1);

    // Retriangulate the cavity as a fan around p.
    int start = loop.begin()->first;  // any; order fixed by the loop walk
    // make the start deterministic: smallest vertex id
    for (const auto& kv : loop) start = std::min(start, kv.first);
    std::vector<int> ring_a, ring_b, ring_outer;
    int a = start;
    do {
      auto it = loop.find(a);
      if (it == loop.end())
        throw NumericalError("mesh: cavity boundary walk failed");
      ring_a.push_back(a);
      ring_b.push_back(it->second.b);
      ring_outer.push_back(it->second.outer);
      a = it->second.b;
    } while (a != start && ring_a.size() <= loop.size());
    if (ring_a.size() != loop.size())
      throw NumericalError("mesh: cavity boundary is disconnected");

    int k = (int)ring_a.size();
    std::vector<int> new_ids(k);
    int base = (int)tris.size();
    for (int i = 0; i < k; i++) new_ids[i] = base + i;
    for (int i = 0; i < k; i++) {
      if (pred::orient2d(pts[ring_a[i]], pts[ring_b[i]], p) <= 0.0)
        throw NumericalError("mesh: cavity is not star-shaped");
      DTri nt;
      nt.v = {ring_a[i], ring_b[i], vid};
      // edges: opp v0=(b,p) -> next fan tri; opp v1=(p,a) -> prev fan tri;
      // opp v2=(a,b) -> outer
      nt.n = {new_ids[(i + 1) % k], new_ids[(i + k - 1) % k], ring_outer[i]};
      nt.alive = true;
      tris.push_back(nt);
      int outer = ring_outer[i];
      if (outer >= 0) {
        DTri& ot = tris[outer];
        for (int j = 0; j < 3; j++) {
          int oa = ot.v[(j + 1) % 3], ob = ot.v[(j + 2) % 3];
          if ((oa == ring_b[i] && ob == ring_a[i]) ||
              (oa == ring_a[i] && ob == ring_b[i]))
            ot.n[j] = new_ids[i];
        }
      }
      vert2tri[ring_a[i]] = new_ids[i];
    }
    for (int t : cavity) tris[t].alive = false;
    vert2tri[vid] = base;
    last_tri = base;
    last_star.assign(new_ids.begin(), new_ids.end());
    return vid;
  }
};

// ---------------------------------------------------------------------------
// Ruppert-style refinement with sizing, segment constraints, grading.

struct Sizing {
  double h = 0.1;
  bool has_pole = false;
  Vec2 pole;
  double gamma = 0.5;
  double r0 = 0.2;
  double floor = 0.0;

  double operator()(const Vec2& x) const {
    if (!has_pole) return h;
    double r = (x - pole).norm();
    double s = h * std::min(1.0, std::pow(r / r0, gamma));
    return std::max(floor, s);
  }
};

class Refiner {
 public:
  Refiner(const Domain& domain, const MeshOptions& opt, const Pole* pole,
          const std::vector<Cut>& cuts)
      : domain_(domain), opt_(opt), pole_(pole), cuts_(cuts), dt_(bbox_lo(), bbox_hi()) {
    sizing_.h = opt.h;
    if (pole_) {
      sizing_.has_pole = true;
      sizing_.pole = pole_->position;
      sizing_.gamma = opt.grading.gamma;
      double dist = domain_.distance_to_boundary(pole_->position);
      sizing_.r0 = opt.grading.radius > 0.0 ? opt.grading.radius
                                            : std::min(0.2, dist);
      sizing_.r0 = std::max(sizing_.r0, 1e-12);
      sizing_.floor = opt.grading.floor_size > 0.0
                          ? opt.grading.floor_size
                          : std::pow(opt.h, 1.0 + opt.grading.gamma);
    }
  }

  Mesh run();

 private:
  Vec2 bbox_lo() const {
    Vec2 lo{1e300, 1e300};
    for (const auto& s : domain_.boundary())
      for (int i = 0; i <= 32; i++) {
        Vec2 q = s.at(i / 32.0);
        lo.x = std::min(lo.x, q.x);
        lo.y = std::min(lo.y, q.y);
      }
    return lo;
  }
  Vec2 bbox_hi() const {
    Vec2 hi{-1e300, -1e300};
    for (const auto& s : domain_.boundary())
      for (int i = 0; i <= 32; i++) {
        Vec2 q = s.at(i / 32.0);
        hi.x = std::max(hi.x, q.x);
        hi.y = std::max(hi.y, q.y);
      }
    return hi;
  }

  struct Seg {
    int a, b;
    int chain;  // 0 = domain boundary, 1+i = cut i
    bool alive = true;
  };

  const Domain& domain_;
  const MeshOptions& opt_;
  const Pole* pole_;
  const std::vector<Cut>& cuts_;
  Delaunay dt_;
  Sizing sizing_;
  std::vector<Seg> segs_;
  std::unordered_map<std::uint64_t, int> seg_lookup_;  // edge key -> seg id
  std::vector<char> feature_;  // per vertex: input corner / pole / junction
  std::deque<int> seg_queue_;
  std::deque<int> tri_queue_;
  int pole_vid_ = -1;

  void check_budget() const {
    if (dt_.pts.size() > opt_.max_vertices + 3)
      throw BudgetError(
          "mesh: vertex budget exceeded; increase h or raise the budget");
  }

  int add_vertex(const Vec2& p, int hint = -1) {
    check_budget();
    int before = (int)dt_.pts.size();
    int vid = dt_.insert(p, hint);
    if ((int)feature_.size() < (int)dt_.pts.size())
      feature_.resize(dt_.pts.size(), 0);
    if (vid == before) {
      for (int t : dt_.last_star) tri_queue_.push_back(t);
      queue_fan_segments();
    }
    return vid;
  }

  // Chain points are snapped onto existing vertices within a tight
  // tolerance: analytically reconstructed points (cut anchors vs boundary
  // walks) can differ by a few ulps and must not become twin vertices.
  int add_chain_vertex(const Vec2& p) {
    std::array<double, 3> o;
    double tol = 1e-12 * std::max(1.0, domain_.char_length());
    if (!dt_.tris.empty()) {
      int t = dt_.locate(p, dt_.last_tri, o);
      for (int i = 0; i < 3; i++) {
        int v = dt_.tris[t].v[i];
        if (!dt_.is_super(v) && (dt_.pts[v] - p).norm() <= tol) return v;
      }
    }
    return add_vertex(p);
  }

  void add_segment(int a, int b, int chain) {
    if (a == b) return;
    int id = (int)segs_.size();
    segs_.push_back({a, b, chain, true});
    seg_lookup_[edge_key(a, b)] = id;
    seg_queue_.push_back(id);
  }

  void queue_fan_segments() {
    // Re-check constraint segments near a fresh vertex.
    for (int t : dt_.last_star) {
      if (!dt_.tris[t].alive) continue;
      for (int i = 0; i < 3; i++) {
        int a = dt_.tris[t].v[(i + 1) % 3];
        int b = dt_.tris[t].v[(i + 2) % 3];
        auto it = seg_lookup_.find(edge_key(a, b));
        if (it != seg_lookup_.end() && segs_[it->second].alive)
          seg_queue_.push_back(it->second);
      }
    }
  }

  // Is (a,b) an edge of the triangulation? Returns the two apex vertices.
  bool find_edge(int a, int b, std::array<int, 2>& apex) const {
    int t = dt_.vert2tri[a];
    if (t < 0) return false;
    int start = t;
    apex = {-1, -1};
    std::size_t guard = dt_.tris.size() + 8;
    while (guard--) {
      const auto& tri = dt_.tris[t];
      int ia = -1;
      for (int i = 0; i < 3; i++)
        if (tri.v[i] == a) ia = i;
      if (ia < 0) return false;
      int v1 = tri.v[(ia + 1) % 3], v2 = tri.v[(ia + 2) % 3];
      if (v1 == b) {
        if (apex[0] < 0)
          apex[0] = v2;
        else if (v2 != apex[0])
          apex[1] = v2;
      }
      if (v2 == b) {
        if (apex[0] < 0)
          apex[0] = v1;
        else if (v1 != apex[0])
          apex[1] = v1;
      }
      // rotate around a: cross the edge (a, v2)
      t = tri.n[(ia + 1) % 3];
      if (t < 0 || t == start) break;
    }
    return apex[0] >= 0;
  }

  bool encroached(const Seg& s) const {
    std::array<int, 2> apex;
    if (!find_edge(s.a, s.b, apex)) return true;
    const Vec2& a = dt_.pts[s.a];
    const Vec2& b = dt_.pts[s.b];
    for (int x : apex) {
      if (x < 0 || dt_.is_super(x)) continue;
      const Vec2& p = dt_.pts[x];
      if ((a - p).dot(b - p) < 0.0) return true;
    }
    return false;
  }

  bool split_segment(int sid) {
    Seg s = segs_[sid];
    if (!s.alive) return false;
    const Vec2 a = dt_.pts[s.a], b = dt_.pts[s.b];
    double len = (b - a).norm();
    if (len < 1e-7 * std::max(1.0, domain_.char_length()))
      return false;  // give up on pathological shards
    Vec2 m;
    bool fa = feature_[s.a], fb = feature_[s.b];
    if (fa != fb) {
      // concentric shell split off the feature endpoint
      double t = std::exp2(std::round(std::log2(0.5 * len)));
      t = std::clamp(t / len, 0.25, 0.75);
      m = fa ? a + t * (b - a) : b + t * (a - b);
    } else {
      m = (a + b) * 0.5;
    }
    segs_[sid].alive = false;
    seg_lookup_.erase(edge_key(s.a, s.b));
    int vm = add_vertex(m);
    if (vm == s.a || vm == s.b) {
      segs_[sid].alive = true;  // degenerate split; restore
      seg_lookup_[edge_key(s.a, s.b)] = sid;
      return false;
    }
    add_segment(s.a, vm, s.chain);
    add_segment(vm, s.b, s.chain);
    return true;
  }

  bool inside_diametral(int sid, const Vec2& p) const {
    const Vec2& a = dt_.pts[segs_[sid].a];
    const Vec2& b = dt_.pts[segs_[sid].b];
    return (a - p).dot(b - p) < 0.0;
  }

  void drain_segments() {
    while (!seg_queue_.empty()) {
      int sid = seg_queue_.front();
      seg_queue_.pop_front();
      if (!segs_[sid].alive) continue;
      if (encroached(segs_[sid])) split_segment(sid);
    }
  }

  bool triangle_bad(int t, Vec2& cc_out) const {
    const auto& tri = dt_.tris[t];
    for (int i = 0; i < 3; i++)
      if (dt_.is_super(tri.v[i])) return false;
    const Vec2 &a = dt_.pts[tri.v[0]], &b = dt_.pts[tri.v[1]],
               &c = dt_.pts[tri.v[2]];
    Vec2 centroid = (a + b + c) / 3.0;
    if (!domain_.contains(centroid)) return false;
    Vec2 cc;
    double radius;
    bool ok = circumcenter(a, b, c, cc, radius);
    double target = sizing_(centroid);
    double min_ang = tri_min_angle(a, b, c);
    if (!ok) {
      cc_out = (a + b + c) / 3.0;  // degenerate: fall back to centroid
      return true;
    }
    cc_out = cc;
    if (radius > kRadiusFactor * target) return true;
    if (min_ang < opt_.min_angle_deg) return true;
    return false;
  }

  // Walk from triangle t toward point q; returns -1 and sets crossed_seg
  // when a constraint segment blocks the path.
  int walk_toward(int t, const Vec2& q, int& crossed_seg) const {
    crossed_seg = -1;
    int came_from = -1;
    std::size_t guard = 4 * dt_.tris.size() + 64;
    while (guard--) {
      const auto& tri = dt_.tris[t];
      int next = -1;
      for (int i = 0; i < 3; i++) {
        const Vec2& ea = dt_.pts[tri.v[(i + 1) % 3]];
        const Vec2& eb = dt_.pts[tri.v[(i + 2) % 3]];
        if (pred::orient2d(ea, eb, q) < 0.0 && tri.n[i] != came_from) {
          next = i;
          break;
        }
      }
      if (next == -1) return t;
      auto it = seg_lookup_.find(
          edge_key(tri.v[(next + 1) % 3], tri.v[(next + 2) % 3]));
      if (it != seg_lookup_.end() && segs_[it->second].alive) {
        crossed_seg = it->second;
        return -1;
      }
      int nt = tri.n[next];
      if (nt < 0) return -1;  // heading out of the triangulation: drop
      came_from = t;
      t = nt;
    }
    return -1;
  }

  void drain_triangles() {
    while (!tri_queue_.empty()) {
      drain_segments();
      int t = tri_queue_.front();
      tri_queue_.pop_front();
      if (t >= (int)dt_.tris.size() || !dt_.tris[t].alive) continue;
      Vec2 cc;
      if (!triangle_bad(t, cc)) continue;
      int crossed = -1;
      int container = walk_toward(t, cc, crossed);
      if (crossed >= 0) {
        // blocked path: split the segment only when the circumcenter truly
        // encroaches it, otherwise let the triangle be
        if (inside_diametral(crossed, cc) && split_segment(crossed))
          tri_queue_.push_back(t);
        continue;
      }
      if (container < 0) continue;  // circumcenter escaped; give up on t
      // snap guard: skip if cc coincides with a vertex of the container
      bool snap = false;
      for (int i = 0; i < 3; i++) {
        const Vec2& v = dt_.pts[dt_.tris[container].v[i]];
        if ((v - cc).norm() < 1e-12 * std::max(1.0, domain_.char_length()))
          snap = true;
      }
      if (snap) continue;
      // Ruppert's rule: a circumcenter that would encroach subsegments is
      // rejected and those subsegments split instead. The encroached
      // subsegments necessarily border cc's insertion cavity.
      std::vector<int> encroached_segs;
      for (int ct : dt_.cavity_of(cc, container)) {
        for (int i = 0; i < 3; i++) {
          int a = dt_.tris[ct].v[(i + 1) % 3];
          int b = dt_.tris[ct].v[(i + 2) % 3];
          auto it = seg_lookup_.find(edge_key(a, b));
          if (it == seg_lookup_.end() || !segs_[it->second].alive) continue;
          if (inside_diametral(it->second, cc))
            encroached_segs.push_back(it->second);
        }
      }
      if (!encroached_segs.empty()) {
        bool progressed = false;
        for (int sid : encroached_segs) progressed |= split_segment(sid);
        if (progressed) tri_queue_.push_back(t);
        continue;
      }
      add_vertex(cc, container);
    }
  }

  // Place graded points along a straight run from s to e (exclusive).
  std::vector<Vec2> walk_line(const Vec2& s, const Vec2& e) {
    std::vector<Vec2> out;
    double len = (e - s).norm();
    Vec2 dir = (e - s) / len;
    double t = 0.0;
    while (true) {
      double step = sizing_(s + t * dir);
      if (t + 1.4 * step >= len) break;
      t += step;
      out.push_back(s + t * dir);
    }
    return out;
  }

  std::vector<Vec2> chain_points();

  Mesh finalize();

  friend Mesh build_mesh(const Domain&, const MeshOptions&, const Pole*,
                         const std::vector<Cut>&);
};

Mesh Refiner::run() {
  if (!(opt_.h > 0.0)) throw PreconditionError("mesh: h must be positive");
  if (!(opt_.grading.gamma > 0.0 && opt_.grading.gamma <= 1.0))
    throw PreconditionError("mesh: grading exponent must lie in (0, 1]");
  if (!cuts_.empty() && !pole_)
    throw PreconditionError("mesh: cuts require a pole");
  if (pole_ && !domain_.contains(pole_->position))
    throw PreconditionError("mesh: pole must be strictly interior");
  for (const auto& c : cuts_) validate_cut(domain_, c);

  // Cut anchors that must appear as boundary chain vertices.
  std::vector<Vec2> anchors;
  for (const auto& c : cuts_) anchors.push_back(c.boundary_end());

  // --- boundary chain ---
  std::vector<Vec2> chain;
  for (const auto& bs : domain_.boundary()) {
    // forced parameters: endpoints and any anchor on this piece
    std::vector<double> forced{0.0, 1.0};
    for (const auto& q : anchors) {
      if (bs.kind == BoundarySegment::Kind::Line) {
        Vec2 d = bs.b - bs.a;
        double len2 = d.squared_norm();
        if (len2 == 0.0) continue;
        double t = (q - bs.a).dot(d) / len2;
        if (t > 1e-12 && t < 1.0 - 1e-12 &&
            (bs.a + t * d - q).norm() < 1e-9 * std::max(1.0, domain_.char_length()))
          forced.push_back(t);
      } else {
        double ang = std::atan2(q.y - bs.center.y, q.x - bs.center.x);
        double rel = wrap2pi(ang - bs.t0);
        double span = bs.t1 - bs.t0;
        if (rel > 1e-12 && rel < span - 1e-12 &&
            std::fabs((q - bs.center).norm() - bs.radius) <
                1e-9 * std::max(1.0, domain_.char_length()))
          forced.push_back(rel / span);
      }
    }
    std::sort(forced.begin(), forced.end());
    forced.erase(std::unique(forced.begin(), forced.end()), forced.end());

    for (size_t fi = 0; fi + 1 < forced.size(); fi++) {
      double t0 = forced[fi], t1 = forced[fi + 1];
      chain.push_back(bs.at(t0));
      if (bs.kind == BoundarySegment::Kind::Line) {
        Vec2 s = bs.at(t0), e = bs.at(t1);
        for (const auto& q : walk_line(s, e)) chain.push_back(q);
      } else {
        // walk the arc by arc length with the local sizing
        double a0 = bs.t0 + t0 * (bs.t1 - bs.t0);
        double a1 = bs.t0 + t1 * (bs.t1 - bs.t0);
        double ang = a0;
        while (true) {
          Vec2 cur{bs.center.x + bs.radius * std::cos(ang),
                   bs.center.y + bs.radius * std::sin(ang)};
          double step = sizing_(cur) / bs.radius;
          if (ang + 1.4 * step >= a1) break;
          ang += step;
          chain.push_back({bs.center.x + bs.radius * std::cos(ang),
                           bs.center.y + bs.radius * std::sin(ang)});
        }
      }
    }
  }
  // drop consecutive duplicates (shared endpoints between pieces)
  std::vector<Vec2> bpts;
  for (const auto& q : chain) {
    if (bpts.empty() || (q - bpts.back()).norm() > 1e-14) bpts.push_back(q);
  }
  while (bpts.size() > 1 && (bpts.front() - bpts.back()).norm() < 1e-14)
    bpts.pop_back();

  std::vector<int> bids;
  for (const auto& q : bpts) {
    int id = add_chain_vertex(q);
    feature_[id] = 1;  // boundary chain vertices are shell anchors
    bids.push_back(id);
  }
  for (size_t i = 0; i < bids.size(); i++)
    add_segment(bids[i], bids[(i + 1) % bids.size()], 0);

  // --- pole and cut chains ---
  if (pole_) {
    pole_vid_ = add_chain_vertex(pole_->position);
    feature_[pole_vid_] = 1;
  }
  std::vector<std::vector<int>> cut_ids(cuts_.size());
  for (size_t ci = 0; ci < cuts_.size(); ci++) {
    const Cut& cut = cuts_[ci];
    std::vector<int> ids{pole_vid_};
    for (size_t si = 0; si + 1 < cut.path.size(); si++) {
      const Vec2 s = cut.path[si], e = cut.path[si + 1];
      for (const auto& q : walk_line(s, e)) ids.push_back(add_chain_vertex(q));
      int eid = add_chain_vertex(e);
      feature_[eid] = 1;
      ids.push_back(eid);
    }
    for (size_t i = 0; i + 1 < ids.size(); i++)
      add_segment(ids[i], ids[i + 1], 1 + (int)ci);
    cut_ids[ci] = std::move(ids);
  }

  // --- refinement ---
  drain_segments();
  for (int t = 0; t < (int)dt_.tris.size(); t++)
    if (dt_.tris[t].alive) tri_queue_.push_back(t);
  // iterate to a fixpoint: insertions can re-encroach segments that no
  // longer show up in any insertion fan, so re-scan between rounds
  const bool debug = std::getenv("ABSPEC_MESH_DEBUG") != nullptr;
  for (int round = 0; round < 10000; round++) {
    drain_triangles();
    bool any = false;
    for (int i = 0; i < (int)segs_.size(); i++) {
      if (segs_[i].alive && encroached(segs_[i])) {
        seg_queue_.push_back(i);
        any = true;
      }
    }
    if (debug)
      std::fprintf(stderr, "mesh round %d: verts=%zu segs=%zu enc=%d\n",
                   round, dt_.pts.size(), segs_.size(), (int)any);
    if (!any && tri_queue_.empty()) break;
    drain_segments();
  }

  // All constraints must now be Gabriel edges.
  for (const auto& s : segs_) {
    if (!s.alive) continue;
    std::array<int, 2> apex;
    if (!find_edge(s.a, s.b, apex)) {
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "mesh: failed to recover a constraint segment "
                    "(chain %d, (%.6g,%.6g)-(%.6g,%.6g), len %.3g)",
                    s.chain, dt_.pts[s.a].x, dt_.pts[s.a].y, dt_.pts[s.b].x,
                    dt_.pts[s.b].y, (dt_.pts[s.b] - dt_.pts[s.a]).norm());
      throw NumericalError(buf);
    }
  }

  return finalize();
}

Mesh Refiner::finalize() {
  // classify triangles: flood fill from an inside seed without crossing
  // boundary-chain segments
  int nt = (int)dt_.tris.size();
  std::vector<char> keep(nt, 0);
  int seed = -1;
  for (int t = 0; t < nt; t++) {
    if (!dt_.tris[t].alive) continue;
    bool super = false;
    for (int i = 0; i < 3; i++)
      if (dt_.is_super(dt_.tris[t].v[i])) super = true;
    if (super) continue;
    const auto& tri = dt_.tris[t];
    Vec2 centroid =
        (dt_.pts[tri.v[0]] + dt_.pts[tri.v[1]] + dt_.pts[tri.v[2]]) / 3.0;
    if (domain_.contains(centroid)) {
      seed = t;
      break;
    }
  }
  if (seed < 0) throw NumericalError("mesh: no interior triangle found");

  std::vector<int> stack{seed};
  keep[seed] = 1;
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    for (int i = 0; i < 3; i++) {
      int nb = dt_.tris[t].n[i];
      if (nb < 0 || keep[nb] || !dt_.tris[nb].alive) continue;
      int a = dt_.tris[t].v[(i + 1) % 3], b = dt_.tris[t].v[(i + 2) % 3];
      auto it = seg_lookup_.find(edge_key(a, b));
      if (it != seg_lookup_.end() && segs_[it->second].chain == 0) continue;
      keep[nb] = 1;
      stack.push_back(nb);
    }
  }

  // compact vertices
  std::vector<int> newid(dt_.pts.size(), -1);
  Mesh mesh;
  for (int t = 0; t < nt; t++) {
    if (!keep[t]) continue;
    for (int i = 0; i < 3; i++) {
      int v = dt_.tris[t].v[i];
      if (newid[v] < 0) {
        newid[v] = (int)mesh.points.size();
        mesh.points.push_back(dt_.pts[v]);
      }
    }
    Triangle tri;
    for (int i = 0; i < 3; i++) tri.v[i] = newid[dt_.tris[t].v[i]];
    mesh.triangles.push_back(tri);
  }

  // boundary flags from edges with a single incident kept triangle
  std::unordered_map<std::uint64_t, int> edge_use;
  for (const auto& tri : mesh.triangles)
    for (int i = 0; i < 3; i++)
      edge_use[edge_key(tri.v[i], tri.v[(i + 1) % 3])]++;
  mesh.boundary_vertex.assign(mesh.points.size(), 0);
  for (const auto& tri : mesh.triangles) {
    for (int i = 0; i < 3; i++) {
      int a = tri.v[i], b = tri.v[(i + 1) % 3];
      if (edge_use[edge_key(a, b)] == 1) {
        mesh.boundary_vertex[a] = 1;
        mesh.boundary_vertex[b] = 1;
      }
    }
  }

  if (pole_vid_ >= 0) {
    mesh.pole_vertex = newid[pole_vid_];
    if (mesh.pole_vertex < 0)
      throw NumericalError("mesh: pole vertex lost during finalization");
  }

  // rebuild cut chains in order, pole first
  int ncuts = (int)cuts_.size();
  mesh.cut_chains.resize(ncuts);
  for (int ci = 0; ci < ncuts; ci++) {
    std::unordered_map<int, std::vector<int>> adj;
    for (const auto& s : segs_) {
      if (!s.alive || s.chain != 1 + ci) continue;
      adj[s.a].push_back(s.b);
      adj[s.b].push_back(s.a);
    }
    std::vector<int> order{pole_vid_};
    int prev = -1, cur = pole_vid_;
    while (true) {
      auto it = adj.find(cur);
      if (it == adj.end()) break;
      int next = -1;
      for (int cand : it->second)
        if (cand != prev) next = cand;
      if (next < 0) break;
      order.push_back(next);
      prev = cur;
      cur = next;
    }
    if (order.size() < 2)
      throw NumericalError("mesh: cut chain reconstruction failed");
    std::vector<int> mapped;
    for (int v : order) {
      if (newid[v] < 0)
        throw NumericalError("mesh: cut chain vertex lost in finalization");
      mapped.push_back(newid[v]);
    }
    mesh.cut_chains[ci] = std::move(mapped);
  }

  if (mesh.pole_vertex >= 0) {
    mesh.dist_to_pole.resize(mesh.points.size());
    const Vec2 pp = mesh.points[mesh.pole_vertex];
    for (size_t i = 0; i < mesh.points.size(); i++)
      mesh.dist_to_pole[i] = (mesh.points[i] - pp).norm();
  }

  // orientation sanity (all CCW by construction)
  for (const auto& tri : mesh.triangles) {
    if (tri_area(mesh.points[tri.v[0]], mesh.points[tri.v[1]],
                 mesh.points[tri.v[2]]) <= 0.0)
      throw NumericalError("mesh: inverted triangle after finalization");
  }
  return mesh;
}

}  // namespace

// ---------------------------------------------------------------------------
// Mesh methods

int Mesh::edge_count() const {
  std::unordered_set<std::uint64_t> edges;
  for (const auto& t : triangles)
    for (int i = 0; i < 3; i++) edges.insert(edge_key(t.v[i], t.v[(i + 1) % 3]));
  return (int)edges.size();
}

double Mesh::total_area() const {
  double s = 0.0;
  for (const auto& t : triangles)
    s += tri_area(points[t.v[0]], points[t.v[1]], points[t.v[2]]);
  return s;
}

double Mesh::min_angle_deg() const {
  double m = 180.0;
  for (const auto& t : triangles)
    m = std::min(m, tri_min_angle(points[t.v[0]], points[t.v[1]],
                                  points[t.v[2]]));
  return m;
}

double Mesh::min_edge_length() const {
  double m = 1e300;
  for (const auto& t : triangles)
    for (int i = 0; i < 3; i++)
      m = std::min(m, (points[t.v[i]] - points[t.v[(i + 1) % 3]]).norm());
  return m;
}

bool Mesh::euler_ok() const {
  return vertex_count() - edge_count() + triangle_count() + 1 == 2;
}

int Mesh::locate(const Vec2& p, std::array<double, 3>& bary) const {
  int best = -1;
  double best_min = -1e300;
  for (int t = 0; t < (int)triangles.size(); t++) {
    const Vec2 &a = points[triangles[t].v[0]], &b = points[triangles[t].v[1]],
               &c = points[triangles[t].v[2]];
    double area = tri_area(a, b, c);
    if (area <= 0.0) continue;
    double l0 = tri_area(p, b, c) / area;
    double l1 = tri_area(a, p, c) / area;
    double l2 = tri_area(a, b, p) / area;
    double mn = std::min({l0, l1, l2});
    if (mn > best_min) {
      best_min = mn;
      best = t;
      bary = {l0, l1, l2};
    }
    if (mn >= 0.0) return t;  // inside (possibly on an edge)
  }
  if (best_min > -1e-12) return best;
  return -1;
}

std::vector<std::array<int, 3>> mesh_adjacency(const Mesh& mesh) {
  std::vector<std::array<int, 3>> nbr(mesh.triangles.size(), {-1, -1, -1});
  std::unordered_map<std::uint64_t, std::pair<int, int>> half;  // edge -> (t,i)
  for (int t = 0; t < (int)mesh.triangles.size(); t++) {
    for (int i = 0; i < 3; i++) {
      int a = mesh.triangles[t].v[(i + 1) % 3];
      int b = mesh.triangles[t].v[(i + 2) % 3];
      auto key = edge_key(a, b);
      auto it = half.find(key);
      if (it == half.end()) {
        half[key] = {t, i};
      } else {
        nbr[t][i] = it->second.first;
        nbr[it->second.first][it->second.second] = t;
      }
    }
  }
  return nbr;
}

VertexFan vertex_fan(const Mesh& mesh, int v) {
  auto nbr = mesh_adjacency(mesh);
  std::vector<int> incident;
  for (int t = 0; t < (int)mesh.triangles.size(); t++)
    for (int i = 0; i < 3; i++)
      if (mesh.triangles[t].v[i] == v) incident.push_back(t);
  VertexFan fan;
  if (incident.empty()) return fan;

  auto local_index = [&](int t) {
    for (int i = 0; i < 3; i++)
      if (mesh.triangles[t].v[i] == v) return i;
    return -1;
  };
  // find a starting triangle: one whose clockwise neighbor around v is absent
  int start = incident.front();
  for (int t : incident) {
    int i = local_index(t);
    if (nbr[t][(i + 2) % 3] < 0) {  // edge (v, v[i+1]) is a border
      start = t;
      break;
    }
  }
  int cur = start;
  std::unordered_set<int> seen;
  while (cur >= 0 && !seen.count(cur)) {
    seen.insert(cur);
    fan.tris.push_back(cur);
    int i = local_index(cur);
    cur = nbr[cur][(i + 1) % 3];  // rotate across edge (v, v[i+2])
    if (cur == start) {
      fan.closed = true;
      break;
    }
  }
  return fan;
}

Mesh triangulate(const Domain& domain, const MeshOptions& opt,
                 const Pole* pole, const std::vector<Cut>& cuts) {
  Refiner refiner(domain, opt, pole, cuts);
  return refiner.run();
}

// ---------------------------------------------------------------------------
// Cut insertion

CutMesh insert_cut(const Mesh& mesh, std::size_t chain_index) {
  if (chain_index >= mesh.cut_chains.size())
    throw PreconditionError("insert_cut: mesh has no such cut chain");
  const std::vector<int>& chain = mesh.cut_chains[chain_index];
  if (mesh.pole_vertex < 0 || chain.front() != mesh.pole_vertex)
    throw PreconditionError("insert_cut: cut chain must start at the pole");

  CutMesh cm;
  cm.mesh = mesh;
  cm.mesh.cut_chains.clear();
  cm.pole_vertex = mesh.pole_vertex;
  int K = (int)chain.size() - 1;  // chain[1..K] get duplicated

  std::vector<int> dup(K + 1, -1);
  for (int i = 1; i <= K; i++) {
    dup[i] = (int)cm.mesh.points.size();
    cm.mesh.points.push_back(mesh.points[chain[i]]);
    cm.mesh.boundary_vertex.push_back(mesh.boundary_vertex[chain[i]]);
    if (!mesh.dist_to_pole.empty())
      cm.mesh.dist_to_pole.push_back(mesh.dist_to_pole[chain[i]]);
  }

  // incident triangles per chain vertex
  std::vector<std::vector<int>> incident(K + 1);
  for (int t = 0; t < (int)mesh.triangles.size(); t++) {
    for (int i = 0; i < 3; i++) {
      for (int ci = 1; ci <= K; ci++)
        if (mesh.triangles[t].v[i] == chain[ci]) incident[ci].push_back(t);
    }
  }

  auto in_ccw = [](double from, double x, double to) {
    double span = wrap2pi(to - from);
    double off = wrap2pi(x - from);
    return off > 0.0 && off < span;
  };

  for (int ci = 1; ci <= K; ci++) {
    const Vec2 v = mesh.points[chain[ci]];
    double ang_prev = (mesh.points[chain[ci - 1]] - v).angle();
    bool has_next = ci < K;
    double ang_next = has_next ? (mesh.points[chain[ci + 1]] - v).angle() : 0.0;
    Vec2 d_walk = v - mesh.points[chain[ci - 1]];
    for (int t : incident[ci]) {
      const auto& tri = cm.mesh.triangles[t];
      Vec2 centroid = (cm.mesh.points[tri.v[0]] + cm.mesh.points[tri.v[1]] +
                       cm.mesh.points[tri.v[2]]) /
                      3.0;
      Vec2 u = centroid - v;
      bool left;
      if (has_next) {
        bool l = in_ccw(ang_next, u.angle(), ang_prev);
        bool r = in_ccw(ang_prev, u.angle(), ang_next);
        if (l == r)
          throw NumericalError("insert_cut: ambiguous side classification");
        left = l;
      } else {
        left = d_walk.cross(u) > 0.0;
      }
      if (!left) {
        for (int i = 0; i < 3; i++)
          if (cm.mesh.triangles[t].v[i] == chain[ci])
            cm.mesh.triangles[t].v[i] = dup[ci];
      }
    }
  }

  cm.chain_left = chain;
  cm.chain_right.resize(K + 1);
  cm.chain_right[0] = mesh.pole_vertex;
  for (int i = 1; i <= K; i++) cm.chain_right[i] = dup[i];
  for (int i = 1; i < K; i++) cm.pairs.push_back({chain[i], dup[i]});

  // structural audit: each cut edge must now exist once per side
  std::unordered_map<std::uint64_t, int> edge_use;
  for (const auto& tri : cm.mesh.triangles)
    for (int i = 0; i < 3; i++)
      edge_use[edge_key(tri.v[i], tri.v[(i + 1) % 3])]++;
  for (int i = 0; i + 1 <= K; i++) {
    int l0 = cm.chain_left[i], l1 = cm.chain_left[i + 1];
    int r0 = cm.chain_right[i], r1 = cm.chain_right[i + 1];
    if (edge_use[edge_key(l0, l1)] != 1 || edge_use[edge_key(r0, r1)] != 1)
      throw NumericalError("insert_cut: cut edge duplication failed");
  }
  // walking triangles around the pole must cross the cut exactly once
  VertexFan fan = vertex_fan(cm.mesh, cm.pole_vertex);
  if (fan.closed)
    throw NumericalError("insert_cut: pole fan still closed after cutting");
  return cm;
}

// ---------------------------------------------------------------------------
// Double cover

CoverMesh double_cover(const CutMesh& cm) {
  const Mesh& base = cm.mesh;
  int nv = base.vertex_count();
  int K = (int)cm.chain_left.size() - 1;

  std::vector<char> role(nv, 0);  // 1 = pole, 2 = left chain, 3 = right chain
  std::vector<int> chain_pos(nv, -1);
  role[cm.pole_vertex] = 1;
  for (int i = 1; i <= K; i++) {
    role[cm.chain_left[i]] = 2;
    chain_pos[cm.chain_left[i]] = i;
    role[cm.chain_right[i]] = 3;
    chain_pos[cm.chain_right[i]] = i;
  }

  CoverMesh cover;
  std::vector<int> map0(nv, -1), map1(nv, -1);
  auto push_vertex = [&](int src) {
    int id = (int)cover.mesh.points.size();
    cover.mesh.points.push_back(base.points[src]);
    cover.mesh.boundary_vertex.push_back(base.boundary_vertex[src]);
    if (!base.dist_to_pole.empty())
      cover.mesh.dist_to_pole.push_back(base.dist_to_pole[src]);
    return id;
  };

  // pole: a single branch vertex
  int pole_id = push_vertex(cm.pole_vertex);
  map0[cm.pole_vertex] = map1[cm.pole_vertex] = pole_id;
  cover.pole_vertex = pole_id;

  // seam vertices: A_i = (sheet0, left) = (sheet1, right); B_i the other
  for (int i = 1; i <= K; i++) {
    int a = push_vertex(cm.chain_left[i]);
    int b = push_vertex(cm.chain_left[i]);
    map0[cm.chain_left[i]] = a;
    map1[cm.chain_right[i]] = a;
    map1[cm.chain_left[i]] = b;
    map0[cm.chain_right[i]] = b;
  }

  for (int v = 0; v < nv; v++) {
    if (role[v] != 0) continue;
    map0[v] = push_vertex(v);
    map1[v] = push_vertex(v);
  }

  for (const auto& tri : base.triangles) {
    Triangle t0, t1;
    for (int i = 0; i < 3; i++) {
      t0.v[i] = map0[tri.v[i]];
      t1.v[i] = map1[tri.v[i]];
    }
    cover.mesh.triangles.push_back(t0);
    cover.mesh.triangles.push_back(t1);
  }

  // deck transformation: swap sheets
  cover.deck.assign(cover.mesh.points.size(), -1);
  for (int v = 0; v < nv; v++) {
    cover.deck[map0[v]] = map1[v];
    cover.deck[map1[v]] = map0[v];
  }
  for (size_t i = 0; i < cover.deck.size(); i++) {
    if (cover.deck[i] < 0 || cover.deck[(size_t)cover.deck[i]] != (int)i)
      throw NumericalError("double_cover: deck permutation is not an involution");
    if (cover.deck[i] == (int)i && (int)i != pole_id)
      throw NumericalError("double_cover: deck fixes a non-pole vertex");
  }

  // gluing audit: the pole fan on the cover must close after one loop of
  // 2x the base fan size (walking around the pole winds twice)
  VertexFan base_fan = vertex_fan(cm.mesh, cm.pole_vertex);
  VertexFan cover_fan = vertex_fan(cover.mesh, pole_id);
  if (!cover_fan.closed ||
      cover_fan.tris.size() != 2 * base_fan.tris.size())
    throw NumericalError("double_cover: gluing produced a non-conforming fan");
  return cover;
}

// ---------------------------------------------------------------------------
// Plain-text mesh IO

void write_mesh(std::ostream& os, const Mesh& mesh) {
  char buf[128];
  os << mesh.vertex_count() << " " << mesh.edge_count() << " "
     << mesh.triangle_count() << "\n";
  for (int i = 0; i < mesh.vertex_count(); i++) {
    int flags = 0;
    if (!mesh.boundary_vertex.empty() && mesh.boundary_vertex[i]) flags |= 1;
    if (mesh.pole_vertex == i) flags |= 2;
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g %d\n", i, mesh.points[i].x,
                  mesh.points[i].y, flags);
    os << buf;
  }
  for (int t = 0; t < mesh.triangle_count(); t++) {
    os << t << " " << mesh.triangles[t].v[0] << " " << mesh.triangles[t].v[1]
       << " " << mesh.triangles[t].v[2] << "\n";
  }
}

Mesh read_mesh(std::istream& is) {
  Mesh mesh;
  int nv, ne, nt;
  if (!(is >> nv >> ne >> nt))
    throw ConfigError("mesh file: malformed header (expected 'V E T')");
  mesh.points.resize(nv);
  mesh.boundary_vertex.assign(nv, 0);
  for (int i = 0; i < nv; i++) {
    int id, flags;
    double x, y;
    if (!(is >> id >> x >> y >> flags) || id != i)
      throw ConfigError("mesh file: malformed vertex line " +
                        std::to_string(i));
    mesh.points[i] = {x, y};
    if (flags & 1) mesh.boundary_vertex[i] = 1;
    if (flags & 2) mesh.pole_vertex = i;
  }
  mesh.triangles.resize(nt);
  for (int t = 0; t < nt; t++) {
    int id, a, b, c;
    if (!(is >> id >> a >> b >> c) || id != t)
      throw ConfigError("mesh file: malformed triangle line " +
                        std::to_string(t));
    if (a < 0 || a >= nv || b < 0 || b >= nv || c < 0 || c >= nv)
      throw ConfigError("mesh file: triangle references unknown vertex");
    mesh.triangles[t].v = {a, b, c};
  }
  if (mesh.edge_count() != ne)
    throw ConfigError("mesh file: edge count does not match topology");
  if (mesh.pole_vertex >= 0) {
    mesh.dist_to_pole.resize(nv);
    const Vec2 pp = mesh.points[mesh.pole_vertex];
    for (int i = 0; i < nv; i++)
      mesh.dist_to_pole[i] = (mesh.points[i] - pp).norm();
  }
  return mesh;
}

}  // namespace abspec
