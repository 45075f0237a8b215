#pragma once

#include <vector>

namespace tgns {

// One quadrature node on the reference triangle {(x,y): x,y >= 0, x+y <= 1},
// stored as barycentric coordinates (l0 = 1-x-y, l1 = x, l2 = y).  The weight
// includes the reference-triangle measure, so weights sum to 1/2.
struct QuadPoint {
  double l0, l1, l2;
  double weight;
};

struct QuadratureRule {
  int degree = 0;  // total polynomial degree integrated exactly
  std::vector<QuadPoint> points;
};

// Conical-product Gauss rule on the reference triangle: Gauss-Legendre in one
// direction, Gauss-Jacobi (weight 1-v) in the other.  Exact for all bivariate
// polynomials of total degree <= degree; nodes are strictly interior.
QuadratureRule triangle_quadrature(int degree);

// Gauss-Legendre rule on [0,1] (weight 1), exact for degree <= 2n-1.
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace tgns
