#pragma once

#include "tdcfem/core.hpp"

namespace tdcfem {

struct QuadRule {
  Eigen::MatrixXd points;   // n x dim, coordinates in [-1,1]^dim
  Eigen::VectorXd weights;  // n
  int order = 0;            // polynomial exactness per direction
};

// Nodes and weights of the n-point Gauss-Legendre rule on [-1,1].
void gauss_legendre_1d(int n, Eigen::VectorXd& x, Eigen::VectorXd& w);

// Tensor-product Gauss-Legendre rule on [-1,1]^dim with n points per
// direction, exact to degree 2n-1 per direction.
QuadRule gauss_rule(int dim, int n);

}  // namespace tdcfem
