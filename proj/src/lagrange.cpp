#include "tdcfem/lagrange.hpp"

namespace tdcfem {

Shape1D lagrange_1d(int p, double x) {
  if (p < 1 || p > 12) fail(ErrorCode::InvalidInput, "lagrange_1d supports 1 <= p <= 12");
  const int n = p + 1;
  Eigen::VectorXd t(n);
  for (int j = 0; j < n; ++j) t[j] = -1.0 + 2.0 * j / p;

  Shape1D s;
  s.N.setZero(n);
  s.dN.setZero(n);
  s.d2N.setZero(n);
  for (int i = 0; i < n; ++i) {
    double denom = 1.0;
    for (int j = 0; j < n; ++j)
      if (j != i) denom *= t[i] - t[j];

    double val = 1.0;
    for (int j = 0; j < n; ++j)
      if (j != i) val *= x - t[j];
    s.N[i] = val / denom;

    double d1 = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      double prod = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != i && j != k) prod *= x - t[j];
      d1 += prod;
    }
    s.dN[i] = d1 / denom;

    double d2 = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      for (int l = 0; l < n; ++l) {
        if (l == i || l == k) continue;
        double prod = 1.0;
        for (int j = 0; j < n; ++j)
          if (j != i && j != k && j != l) prod *= x - t[j];
        d2 += prod;
      }
    }
    s.d2N[i] = d2 / denom;
  }
  return s;
}

void shape_eval(int q, int p, const Vec& xi, bool want_second, ShapeEval& out) {
  if (q < 1 || q > 3) fail(ErrorCode::InvalidInput, "shape_eval q must be 1..3");
  const int n1 = p + 1;
  Shape1D s1[3];
  for (int axis = 0; axis < q; ++axis) s1[axis] = lagrange_1d(p, xi[axis]);

  const int n = n_basis(q, p);
  out.N.resize(n);
  out.dN.resize(n, q);
  if (want_second) {
    out.d2N.resize(n);
  } else {
    out.d2N.clear();
  }

  int idx[3] = {0, 0, 0};
  for (int a = 0; a < n; ++a) {
    int rest = a;
    for (int axis = 0; axis < q; ++axis) {
      idx[axis] = rest % n1;
      rest /= n1;
    }
    double val = 1.0;
    for (int axis = 0; axis < q; ++axis) val *= s1[axis].N[idx[axis]];
    out.N[a] = val;
    for (int da = 0; da < q; ++da) {
      double dv = 1.0;
      for (int axis = 0; axis < q; ++axis)
        dv *= (axis == da) ? s1[axis].dN[idx[axis]] : s1[axis].N[idx[axis]];
      out.dN(a, da) = dv;
    }
    if (want_second) {
      Mat h(q, q);
      for (int da = 0; da < q; ++da) {
        for (int db = 0; db <= da; ++db) {
          double dv = 1.0;
          for (int axis = 0; axis < q; ++axis) {
            if (axis == da && axis == db)
              dv *= s1[axis].d2N[idx[axis]];
            else if (axis == da || axis == db)
              dv *= s1[axis].dN[idx[axis]];
            else
              dv *= s1[axis].N[idx[axis]];
          }
          h(da, db) = dv;
          h(db, da) = dv;
        }
      }
      out.d2N[a] = h;
    }
  }
}

Eigen::MatrixXd reference_nodes(int q, int p) {
  const int n1 = p + 1;
  const int n = n_basis(q, p);
  Eigen::MatrixXd nodes(n, q);
  for (int a = 0; a < n; ++a) {
    int rest = a;
    for (int axis = 0; axis < q; ++axis) {
      int i = rest % n1;
      rest /= n1;
      nodes(a, axis) = -1.0 + 2.0 * i / p;
    }
  }
  return nodes;
}

}  // namespace tdcfem
