#include "tdcfem/quadrature.hpp"

#include <cmath>

namespace tdcfem {

void gauss_legendre_1d(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  if (n < 1) fail(ErrorCode::InvalidInput, "gauss_legendre_1d needs n >= 1");
  x.resize(n);
  w.resize(n);
  // Newton iteration on the Legendre recurrence from Chebyshev initial
  // guesses; converges to machine precision in a handful of steps.
  for (int i = 0; i < n; ++i) {
    double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = xi;
      if (n == 1) {
        p1 = xi;
      }
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double pn = (n == 1) ? xi : p1;
      double pnm1 = (n == 1) ? 1.0 : p0;
      dp = n * (pnm1 - xi * pn) / (1.0 - xi * xi);
      double dx = pn / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x[n - 1 - i] = xi;  // ascending order
    w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
}

QuadRule gauss_rule(int dim, int n) {
  if (dim < 1 || dim > 3) fail(ErrorCode::InvalidInput, "gauss_rule dim must be 1..3");
  Eigen::VectorXd x, w;
  gauss_legendre_1d(n, x, w);
  QuadRule rule;
  rule.order = 2 * n - 1;
  int total = 1;
  for (int k = 0; k < dim; ++k) total *= n;
  rule.points.resize(total, dim);
  rule.weights.resize(total);
  for (int idx = 0; idx < total; ++idx) {
    int rest = idx;
    double wt = 1.0;
    for (int axis = 0; axis < dim; ++axis) {
      int i = rest % n;
      rest /= n;
      rule.points(idx, axis) = x[i];
      wt *= w[i];
    }
    rule.weights[idx] = wt;
  }
  return rule;
}

}  // namespace tdcfem
