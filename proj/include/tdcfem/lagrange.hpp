#pragma once

#include <vector>

#include "tdcfem/core.hpp"

namespace tdcfem {

// Lagrange basis of order p >= 1 on equally spaced nodes of [-1,1].
struct Shape1D {
  Eigen::VectorXd N, dN, d2N;  // each of size p+1
};

Shape1D lagrange_1d(int p, double x);

// Tensor-product Lagrange basis on [-1,1]^q. Node ordering is lexicographic
// with the first axis running fastest: node = i0 + (p+1)*(i1 + (p+1)*i2).
struct ShapeEval {
  Eigen::VectorXd N;        // n_basis
  Eigen::MatrixXd dN;       // n_basis x q
  std::vector<Mat> d2N;     // n_basis entries of q x q (filled on request)
};

void shape_eval(int q, int p, const Vec& xi, bool want_second, ShapeEval& out);

inline int n_basis(int q, int p) {
  int n = 1;
  for (int k = 0; k < q; ++k) n *= p + 1;
  return n;
}

// Equally spaced reference nodes of [-1,1]^q in the same ordering.
Eigen::MatrixXd reference_nodes(int q, int p);

}  // namespace tdcfem
