#pragma once

#include <vector>

#include "mpp/geom.hpp"
#include "mpp/rng.hpp"

namespace mpp {

// A realisation of a point process on the cube window of volume n.
struct PointConfig {
  int dim = 2;
  double n = 1.0;  // window volume parameter
  std::vector<Pt> pts;

  Window window() const { return Window::cube(n, dim); }
  int size() const { return static_cast<int>(pts.size()); }
};

// Homogeneous Poisson with intensity rho.
PointConfig sample_poisson(double rho, double n, int dim, SeedStream seed);

// Exactly m i.i.d. uniform points.
PointConfig sample_binomial(int m, double n, int dim, SeedStream seed);

// Dependent thinning of a Poisson(lambda) parent process: a parent survives when no
// other parent within distance h carries a smaller age mark. Parents are drawn on the
// window dilated by h so the retention law near the boundary matches the stationary
// one; E[#retained]/(lambda*n) = (1 - exp(-lambda*v_h))/(lambda*v_h), v_h = |B_h|.
PointConfig sample_hardcore_thinned(double lambda, double h, double n, int dim, SeedStream seed);

// Cluster process: Poisson(lambda_p) parents on the window dilated by R, each with a
// Poisson(c) number of offspring placed uniformly in B_R(parent); offspring inside the
// window are returned. Stationary intensity is lambda_p * c.
PointConfig sample_cluster(double lambda_p, double c, double R, double n, int dim,
                           SeedStream seed);

// Slivnyak insertion: the reduced Palm version of a Poisson sample at the given sites
// is the sample itself with the sites appended. Valid for Poisson input only; the
// appended indices are size(), size()+1, ... in order.
PointConfig palm_insert(const PointConfig& base, const std::vector<Pt>& sites);

}  // namespace mpp
