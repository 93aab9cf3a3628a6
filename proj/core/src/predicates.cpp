#include "abspec/predicates.hpp"

#include <cmath>

// Expansion arithmetic after Shewchuk, "Adaptive Precision Floating-Point
// Arithmetic and Fast Robust Geometric Predicates". Only the pieces needed
// for orient2d/incircle are implemented; the exact fallback evaluates the
// raw-coordinate determinants, which keeps the code short at the cost of
// longer expansions (acceptable: the fallback fires rarely).

namespace abspec::pred {
namespace {

constexpr double kEpsilon = 1.1102230246251565e-16;   // 2^-53
constexpr double kSplitter = 134217729.0;             // 2^27 + 1
constexpr double kCcwErrBound = (3.0 + 16.0 * kEpsilon) * kEpsilon;
constexpr double kIccErrBound = (10.0 + 96.0 * kEpsilon) * kEpsilon;

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  double bvirt = x - a;
  double avirt = x - bvirt;
  double bround = b - bvirt;
  double around = a - avirt;
  y = around + bround;
}

inline void two_diff(double a, double b, double& x, double& y) {
  x = a - b;
  double bvirt = a - x;
  double avirt = x + bvirt;
  double bround = bvirt - b;
  double around = a - avirt;
  y = around + bround;
}

inline void split(double a, double& hi, double& lo) {
  double c = kSplitter * a;
  double big = c - a;
  hi = c - big;
  lo = a - hi;
}

inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  double ahi, alo, bhi, blo;
  split(a, ahi, alo);
  split(b, bhi, blo);
  double err = x - ahi * bhi;
  err -= alo * bhi;
  err -= ahi * blo;
  y = alo * blo - err;
}

// h = e + f, zero components eliminated. h must hold elen + flen doubles.
int fast_expansion_sum_zeroelim(int elen, const double* e, int flen,
                                const double* f, double* h) {
  double q = 0.0, qnew, hh;
  int eindex = 0, findex = 0, hindex = 0;
  double enow = e[0], fnow = f[0];
  if ((fnow > enow) == (fnow > -enow)) {
    q = enow;
    if (++eindex < elen) enow = e[eindex];
  } else {
    q = fnow;
    if (++findex < flen) fnow = f[findex];
  }
  while (eindex < elen && findex < flen) {
    if ((fnow > enow) == (fnow > -enow)) {
      two_sum(q, enow, qnew, hh);
      if (++eindex < elen) enow = e[eindex];
    } else {
      two_sum(q, fnow, qnew, hh);
      if (++findex < flen) fnow = f[findex];
    }
    q = qnew;
    if (hh != 0.0) h[hindex++] = hh;
  }
  while (eindex < elen) {
    two_sum(q, enow, qnew, hh);
    if (++eindex < elen) enow = e[eindex];
    q = qnew;
    if (hh != 0.0) h[hindex++] = hh;
  }
  while (findex < flen) {
    two_sum(q, fnow, qnew, hh);
    if (++findex < flen) fnow = f[findex];
    q = qnew;
    if (hh != 0.0) h[hindex++] = hh;
  }
  if (q != 0.0 || hindex == 0) h[hindex++] = q;
  return hindex;
}

// h = b * e, zero components eliminated. h must hold 2*elen doubles.
int scale_expansion_zeroelim(int elen, const double* e, double b, double* h) {
  double bhi, blo;
  split(b, bhi, blo);
  double q, hh, t1, t0;
  two_product(e[0], b, q, hh);
  int hindex = 0;
  if (hh != 0.0) h[hindex++] = hh;
  for (int i = 1; i < elen; i++) {
    double p1, p0;
    two_product(e[i], b, p1, p0);
    two_sum(q, p0, t1, t0);
    if (t0 != 0.0) h[hindex++] = t0;
    double qnew;
    two_sum(p1, t1, qnew, hh);
    q = qnew;
    if (hh != 0.0) h[hindex++] = hh;
  }
  if (q != 0.0 || hindex == 0) h[hindex++] = q;
  return hindex;
}

int negate_expansion(int elen, const double* e, double* h) {
  for (int i = 0; i < elen; i++) h[i] = -e[i];
  return elen;
}

inline void two_one_diff(double a1, double a0, double b, double& x2,
                         double& x1, double& x0) {
  double i;
  two_diff(a0, b, i, x0);
  two_sum(a1, i, x2, x1);
}

inline void two_two_diff(double a1, double a0, double b1, double b0,
                         double& x3, double& x2, double& x1, double& x0) {
  double j, r0;
  two_one_diff(a1, a0, b0, j, r0, x0);
  two_one_diff(j, r0, b1, x3, x2, x1);
}

double orient2d_exact(const Vec2& pa, const Vec2& pb, const Vec2& pc) {
  double axby1, axby0, axcy1, axcy0, bxcy1, bxcy0;
  double bxay1, bxay0, cxay1, cxay0, cxby1, cxby0;
  double at[4], bt[4], ct[4], v[8], w[12];

  two_product(pa.x, pb.y, axby1, axby0);
  two_product(pa.x, pc.y, axcy1, axcy0);
  two_two_diff(axby1, axby0, axcy1, axcy0, at[3], at[2], at[1], at[0]);

  two_product(pb.x, pc.y, bxcy1, bxcy0);
  two_product(pb.x, pa.y, bxay1, bxay0);
  two_two_diff(bxcy1, bxcy0, bxay1, bxay0, bt[3], bt[2], bt[1], bt[0]);

  two_product(pc.x, pa.y, cxay1, cxay0);
  two_product(pc.x, pb.y, cxby1, cxby0);
  two_two_diff(cxay1, cxay0, cxby1, cxby0, ct[3], ct[2], ct[1], ct[0]);

  int vlen = fast_expansion_sum_zeroelim(4, at, 4, bt, v);
  int wlen = fast_expansion_sum_zeroelim(vlen, v, 4, ct, w);
  return w[wlen - 1];
}

// Exact 3x3 determinant of rows (px,py,pz),(qx,qy,qz),(rx,ry,rz) where the
// z entries are expansions (the lifted coordinates). Result in out.
int det3_lifted(const Vec2& p, const Vec2& q, const Vec2& r, int pzlen,
                const double* pz, int qzlen, const double* qz, int rzlen,
                const double* rz, double* out) {
  // term_p = px * (qy*rz - ry*qz)
  double qyrz[8], ryqz[8], nryqz[8], diff1[16], t1[32];
  int a = scale_expansion_zeroelim(rzlen, rz, q.y, qyrz);
  int b = scale_expansion_zeroelim(qzlen, qz, r.y, ryqz);
  int bn = negate_expansion(b, ryqz, nryqz);
  int d1 = fast_expansion_sum_zeroelim(a, qyrz, bn, nryqz, diff1);
  int l1 = scale_expansion_zeroelim(d1, diff1, p.x, t1);

  // term_q = qx * (py*rz - ry*pz)  (subtracted)
  double pyrz[8], rypz[8], nrypz[8], diff2[16], t2[32], nt2[32];
  a = scale_expansion_zeroelim(rzlen, rz, p.y, pyrz);
  b = scale_expansion_zeroelim(pzlen, pz, r.y, rypz);
  bn = negate_expansion(b, rypz, nrypz);
  int d2 = fast_expansion_sum_zeroelim(a, pyrz, bn, nrypz, diff2);
  int l2 = scale_expansion_zeroelim(d2, diff2, q.x, t2);
  l2 = negate_expansion(l2, t2, nt2);

  // term_r = rx * (py*qz - qy*pz)
  double pyqz[8], qypz[8], nqypz[8], diff3[16], t3[32];
  a = scale_expansion_zeroelim(qzlen, qz, p.y, pyqz);
  b = scale_expansion_zeroelim(pzlen, pz, q.y, qypz);
  bn = negate_expansion(b, qypz, nqypz);
  int d3 = fast_expansion_sum_zeroelim(a, pyqz, bn, nqypz, diff3);
  int l3 = scale_expansion_zeroelim(d3, diff3, r.x, t3);

  double s[64];
  int slen = fast_expansion_sum_zeroelim(l1, t1, l2, nt2, s);
  return fast_expansion_sum_zeroelim(slen, s, l3, t3, out);
}

int lift(const Vec2& p, double* z) {
  double xx1, xx0, yy1, yy0;
  two_product(p.x, p.x, xx1, xx0);
  two_product(p.y, p.y, yy1, yy0);
  double xs[2] = {xx0, xx1};
  double ys[2] = {yy0, yy1};
  return fast_expansion_sum_zeroelim(2, xs, 2, ys, z);
}

double incircle_exact(const Vec2& pa, const Vec2& pb, const Vec2& pc,
                      const Vec2& pd) {
  double za[4], zb[4], zc[4], zd[4];
  int la = lift(pa, za), lb = lift(pb, zb), lc = lift(pc, zc),
      ld = lift(pd, zd);

  // det = -det3(b,c,d) + det3(a,c,d) - det3(a,b,d) + det3(a,b,c)
  double m1[96], m2[96], m3[96], m4[96], n1[96], n3[96];
  int k1 = det3_lifted(pb, pc, pd, lb, zb, lc, zc, ld, zd, m1);
  int k2 = det3_lifted(pa, pc, pd, la, za, lc, zc, ld, zd, m2);
  int k3 = det3_lifted(pa, pb, pd, la, za, lb, zb, ld, zd, m3);
  int k4 = det3_lifted(pa, pb, pc, la, za, lb, zb, lc, zc, m4);
  k1 = negate_expansion(k1, m1, n1);
  k3 = negate_expansion(k3, m3, n3);

  double s1[192], s2[192], s3[384];
  int sl1 = fast_expansion_sum_zeroelim(k1, n1, k2, m2, s1);
  int sl2 = fast_expansion_sum_zeroelim(k3, n3, k4, m4, s2);
  int sl3 = fast_expansion_sum_zeroelim(sl1, s1, sl2, s2, s3);
  return s3[sl3 - 1];
}

}  // namespace

double orient2d(const Vec2& pa, const Vec2& pb, const Vec2& pc) {
  double detleft = (pa.x - pc.x) * (pb.y - pc.y);
  double detright = (pa.y - pc.y) * (pb.x - pc.x);
  double det = detleft - detright;
  double detsum;
  if (detleft > 0.0) {
    if (detright <= 0.0) return det;
    detsum = detleft + detright;
  } else if (detleft < 0.0) {
    if (detright >= 0.0) return det;
    detsum = -detleft - detright;
  } else {
    return det;
  }
  double errbound = kCcwErrBound * detsum;
  if (det >= errbound || -det >= errbound) return det;
  return orient2d_exact(pa, pb, pc);
}

double incircle(const Vec2& pa, const Vec2& pb, const Vec2& pc,
                const Vec2& pd) {
  double adx = pa.x - pd.x, ady = pa.y - pd.y;
  double bdx = pb.x - pd.x, bdy = pb.y - pd.y;
  double cdx = pc.x - pd.x, cdy = pc.y - pd.y;

  double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  double alift = adx * adx + ady * ady;
  double cdxady = cdx * ady, adxcdy = adx * cdy;
  double blift = bdx * bdx + bdy * bdy;
  double adxbdy = adx * bdy, bdxady = bdx * ady;
  double clift = cdx * cdx + cdy * cdy;

  double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
               clift * (adxbdy - bdxady);
  double permanent = (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * alift +
                     (std::fabs(cdxady) + std::fabs(adxcdy)) * blift +
                     (std::fabs(adxbdy) + std::fabs(bdxady)) * clift;
  double errbound = kIccErrBound * permanent;
  if (det > errbound || -det > errbound) return det;
  return incircle_exact(pa, pb, pc, pd);
}

}  // namespace abspec::pred
