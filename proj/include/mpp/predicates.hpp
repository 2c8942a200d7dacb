#pragma once

#include "mpp/geom.hpp"

namespace mpp {

// Sign of (b-a) x (c-a): +1 when c lies left of the directed line a->b, -1 right,
// 0 exactly collinear. Double filter with an exact rational fallback.
int orient2d(const Pt& a, const Pt& b, const Pt& c);

// Sign of the incircle determinant for a CCW triangle (a,b,c): +1 when d is strictly
// inside the circumcircle. Exact ties are resolved by a symbolic lift perturbation
// ordered by site index (lower index = larger lift), so the result is never 0 for
// four distinct sites unless every orientation among them also vanishes.
int incircle(const Pt& a, int ia, const Pt& b, int ib, const Pt& c, int ic,
             const Pt& d, int id);

}  // namespace mpp
