#include "tgns/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace tgns {

namespace {

// Nodes/weights of an n-point Gauss rule for the weight implied by the
// three-term recurrence (Golub-Welsch: eigenvalues of the Jacobi matrix are
// the nodes, mu0 * first-eigenvector-component^2 the weights).
void golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0,
                  std::vector<double>& nodes, std::vector<double>& weights) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    jacobi(i, i) = diag(i);
    if (i + 1 < n) {
      jacobi(i, i + 1) = offdiag(i);
      jacobi(i + 1, i) = offdiag(i);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success) throw std::runtime_error("quadrature: eigensolver failed");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
}

// Gauss-Legendre on [-1,1]: a_k = 0, b_k = k/sqrt(4k^2-1), mu0 = 2.
void gauss_legendre_sym(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd b(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) b(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  golub_welsch(a, b, 2.0, nodes, weights);
}

// Gauss-Jacobi on [-1,1] with weight (1-x): a_0 = -1/3,
// a_k = -1/((2k+1)(2k+3)), b_k^2 = k(k+1)/(2k+1)^2, mu0 = 2.
void gauss_jacobi10_sym(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::VectorXd a(n);
  a(0) = -1.0 / 3.0;
  for (int k = 1; k < n; ++k) a(k) = -1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
  Eigen::VectorXd b(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) b(k - 1) = std::sqrt(k * (k + 1.0)) / (2.0 * k + 1.0);
  golub_welsch(a, b, 2.0, nodes, weights);
}

}  // namespace

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::domain_error("gauss_legendre_01: n must be positive");
  gauss_legendre_sym(n, nodes, weights);
  for (int i = 0; i < n; ++i) {
    nodes[i] = 0.5 * (1.0 + nodes[i]);
    weights[i] *= 0.5;
  }
}

QuadratureRule triangle_quadrature(int degree) {
  if (degree < 0) throw std::domain_error("triangle_quadrature: degree must be nonnegative");
  const int n = (degree + 2) / 2;  // 2n-1 >= degree

  // u-direction: plain Gauss-Legendre on [0,1].
  std::vector<double> un, uw;
  gauss_legendre_01(n, un, uw);

  // v-direction: Gauss-Jacobi with the (1-v) area Jacobian folded into the
  // weight; map [-1,1] -> [0,1] turns weight (1-t) dt into 4 (1-v) dv.
  std::vector<double> vn, vw;
  gauss_jacobi10_sym(n, vn, vw);
  for (int i = 0; i < n; ++i) {
    vn[i] = 0.5 * (1.0 + vn[i]);
    vw[i] *= 0.25;
  }

  QuadratureRule rule;
  rule.degree = degree;
  rule.points.reserve(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double u = un[i], v = vn[j];
      const double x = u * (1.0 - v), y = v;
      rule.points.push_back({1.0 - x - y, x, y, uw[i] * vw[j]});
    }
  }
  return rule;
}

}  // namespace tgns
