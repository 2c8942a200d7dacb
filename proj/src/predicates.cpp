#include "mpp/predicates.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>

namespace mpp {

namespace {

using BigInt = boost::multiprecision::cpp_int;

// Exact scaled-integer image of a double: value = mant * 2^(exp2). Only products and
// sums of such pairs are ever needed, so a common-exponent integer representation is
// exact throughout.
struct ScaledInt {
  BigInt mant;
  int exp2;
};

ScaledInt to_scaled(double v) {
  if (v == 0.0) return {BigInt(0), 0};
  int e = 0;
  double m = std::frexp(v, &e);        // v = m * 2^e, |m| in [0.5, 1)
  double mi = std::ldexp(m, 53);       // 53-bit integer mantissa, exact
  return {BigInt(static_cast<long long>(mi)), e - 53};
}

void align(ScaledInt& a, ScaledInt& b) {
  if (a.exp2 == b.exp2) return;
  if (a.exp2 > b.exp2) {
    a.mant <<= (a.exp2 - b.exp2);
    a.exp2 = b.exp2;
  } else {
    b.mant <<= (b.exp2 - a.exp2);
    b.exp2 = a.exp2;
  }
}

ScaledInt operator*(const ScaledInt& a, const ScaledInt& b) {
  return {a.mant * b.mant, a.exp2 + b.exp2};
}
ScaledInt operator-(ScaledInt a, ScaledInt b) {
  align(a, b);
  return {a.mant - b.mant, a.exp2};
}
ScaledInt operator+(ScaledInt a, ScaledInt b) {
  align(a, b);
  return {a.mant + b.mant, a.exp2};
}
int sign_of(const ScaledInt& a) { return a.mant.sign(); }

int orient2d_exact(const Pt& a, const Pt& b, const Pt& c) {
  ScaledInt ax = to_scaled(a[0]), ay = to_scaled(a[1]);
  ScaledInt bx = to_scaled(b[0]), by = to_scaled(b[1]);
  ScaledInt cx = to_scaled(c[0]), cy = to_scaled(c[1]);
  ScaledInt det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  return sign_of(det);
}

}  // namespace

int orient2d(const Pt& a, const Pt& b, const Pt& c) {
  double detl = (b[0] - a[0]) * (c[1] - a[1]);
  double detr = (b[1] - a[1]) * (c[0] - a[0]);
  double det = detl - detr;
  double mag = std::fabs(detl) + std::fabs(detr);
  // conservative roundoff envelope for the two-product difference
  if (std::fabs(det) > 1e-14 * mag) return det > 0.0 ? 1 : -1;
  return orient2d_exact(a, b, c);
}

int incircle(const Pt& a, int ia, const Pt& b, int ib, const Pt& c, int ic,
             const Pt& d, int id) {
  // translated 3x3 determinant, double filter first
  double adx = a[0] - d[0], ady = a[1] - d[1];
  double bdx = b[0] - d[0], bdy = b[1] - d[1];
  double cdx = c[0] - d[0], cdy = c[1] - d[1];
  double aq = adx * adx + ady * ady;
  double bq = bdx * bdx + bdy * bdy;
  double cq = cdx * cdx + cdy * cdy;
  double det = aq * (bdx * cdy - bdy * cdx) + bq * (cdx * ady - cdy * adx) +
               cq * (adx * bdy - ady * bdx);
  double mag = aq * (std::fabs(bdx * cdy) + std::fabs(bdy * cdx)) +
               bq * (std::fabs(cdx * ady) + std::fabs(cdy * adx)) +
               cq * (std::fabs(adx * bdy) + std::fabs(ady * bdx));
  if (std::fabs(det) > 1e-12 * mag) return det > 0.0 ? 1 : -1;

  // exact evaluation
  ScaledInt ax = to_scaled(a[0]), ay = to_scaled(a[1]);
  ScaledInt bx = to_scaled(b[0]), by = to_scaled(b[1]);
  ScaledInt cx = to_scaled(c[0]), cy = to_scaled(c[1]);
  ScaledInt dx = to_scaled(d[0]), dy = to_scaled(d[1]);
  ScaledInt Ax = ax - dx, Ay = ay - dy;
  ScaledInt Bx = bx - dx, By = by - dy;
  ScaledInt Cx = cx - dx, Cy = cy - dy;
  ScaledInt Aq = Ax * Ax + Ay * Ay;
  ScaledInt Bq = Bx * Bx + By * By;
  ScaledInt Cq = Cx * Cx + Cy * Cy;
  ScaledInt E = Aq * (Bx * Cy - By * Cx) + Bq * (Cx * Ay - Cy * Ax) +
                Cq * (Ax * By - Ay * Bx);
  int s = sign_of(E);
  if (s != 0) return s;

  // Cocircular: perturb the lifted coordinate of site i by eps^(i+1). The perturbed
  // determinant is det + d_a*O(d,b,c) + d_b*O(d,c,a) + d_c*O(d,a,b) - d_d*O(a,b,c);
  // the smallest site index contributes the dominant term.
  struct Term {
    int idx;
    int coeff;
  };
  Term terms[4] = {
      {ia, orient2d(d, b, c)},
      {ib, orient2d(d, c, a)},
      {ic, orient2d(d, a, b)},
      {id, -orient2d(a, b, c)},
  };
  std::sort(terms, terms + 4, [](const Term& l, const Term& r) { return l.idx < r.idx; });
  for (const Term& t : terms)
    if (t.coeff != 0) return t.coeff;
  throw model_error("incircle: fully degenerate site quadruple");
}

}  // namespace mpp
