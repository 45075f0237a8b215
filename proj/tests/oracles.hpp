// Test-only reference machinery, kept independent of the library's quadrature
// path: Gauss-Legendre nodes by Newton iteration on the Legendre recurrence,
// collapsed onto the triangle with an explicit Duffy map.
#pragma once

#include "tgns/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace oracle {

struct TriPoint {
  double x, y, w;  // reference-triangle coordinates and weight
};

// Tensor rule with n points per direction; exact for total degree <= 2n - 3
// on the triangle (the Duffy Jacobian costs one degree in v).
std::vector<TriPoint> duffy_rule(int n);

// Integral over the reference triangle.
double integrate_reference(const std::function<double(double, double)>& f, int n = 12);

// Integral over a mesh of an integrand given in physical coordinates per
// element (element index, x, y).
double integrate_mesh(const tgns::Mesh& mesh, const std::function<double(int, double, double)>& f,
                      int n = 12);

// Exact integral of lambda0^a lambda1^b lambda2^c over the reference triangle.
double barycentric_monomial_integral(int a, int b, int c);

}  // namespace oracle
