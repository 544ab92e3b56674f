#pragma once

#include "pinnbench/core.hpp"

namespace pinnbench {

struct QuadRule {
  Vec nodes;
  Vec weights;
};

// Gauss-Legendre rule on [-1,1]: exact for polynomials of degree 2n-1.
// Newton on P_n from the Chebyshev-angle initial guess; the iteration is
// quadratically convergent and lands at machine precision in a few steps.
inline QuadRule gauss_legendre(int n) {
  require(n >= 1, "gauss_legendre: need at least one node");
  QuadRule q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 60; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // one polishing pass so dp matches the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    q.nodes[n - 1 - i] = x;  // initial guesses run from +1 down; store ascending
    q.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

// Gauss-Hermite rule for the weight e^{-x^2} on the whole line, by
// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix (off-diagonal
// sqrt(k/2)), weights come from the first eigenvector components.
inline QuadRule gauss_hermite(int n) {
  require(n >= 1, "gauss_hermite: need at least one node");
  Mat J = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);
    J(k - 1, k) = b;
    J(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  QuadRule q;
  q.nodes = es.eigenvalues();
  q.weights.resize(n);
  const double mu0 = std::sqrt(M_PI);  // integral of the weight
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    q.weights[i] = mu0 * v0 * v0;
  }
  return q;
}

}  // namespace pinnbench
