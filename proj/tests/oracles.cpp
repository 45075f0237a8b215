#include "oracles.hpp"

#include <cmath>

namespace oracle {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on the
// three-term recurrence.
void legendre_rule(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double r = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = r;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * r * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (r * p1 - p0) / (r * r - 1.0);
      const double dr = p1 / dp;
      r -= dr;
      if (std::abs(dr) < 1e-15) break;
    }
    nodes[i] = r;
    weights[i] = 2.0 / ((1.0 - r * r) * dp * dp);
  }
}

}  // namespace

std::vector<TriPoint> duffy_rule(int n) {
  std::vector<double> gn, gw;
  legendre_rule(n, gn, gw);
  std::vector<TriPoint> pts;
  pts.reserve(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (1.0 + gn[i]);
    const double wu = 0.5 * gw[i];
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (1.0 + gn[j]);
      const double wv = 0.5 * gw[j];
      // x = u (1 - v), y = v; dx dy = (1 - v) du dv
      pts.push_back({u * (1.0 - v), v, wu * wv * (1.0 - v)});
    }
  }
  return pts;
}

double integrate_reference(const std::function<double(double, double)>& f, int n) {
  double total = 0.0;
  for (const auto& p : duffy_rule(n)) total += p.w * f(p.x, p.y);
  return total;
}

double integrate_mesh(const tgns::Mesh& mesh, const std::function<double(int, double, double)>& f,
                      int n) {
  const auto pts = duffy_rule(n);
  double total = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Eigen::Vector2d a = mesh.vertices[tri[0]];
    const Eigen::Vector2d b = mesh.vertices[tri[1]];
    const Eigen::Vector2d c = mesh.vertices[tri[2]];
    const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    for (const auto& p : pts) {
      const double x = a.x() + (b.x() - a.x()) * p.x + (c.x() - a.x()) * p.y;
      const double y = a.y() + (b.y() - a.y()) * p.x + (c.y() - a.y()) * p.y;
      total += p.w * det * f(t, x, y);
    }
  }
  return total;
}

double barycentric_monomial_integral(int a, int b, int c) {
  // integral = a! b! c! / (a+b+c+2)! (times 1 for the unit reference triangle
  // with area 1/2: 2A = 1).
  auto fact = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) * fact(c) / fact(a + b + c + 2);
}

}  // namespace oracle
