#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tdcfem/dmat.hpp"
#include "tdcfem/lagrange.hpp"
#include "tdcfem/quadrature.hpp"

using namespace tdcfem;

TEST_CASE("gauss rule basics") {
  QuadRule r1 = gauss_rule(1, 1);
  CHECK(r1.points.rows() == 1);
  CHECK(r1.points(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r1.weights[0] == doctest::Approx(2.0).epsilon(1e-15));

  QuadRule r2 = gauss_rule(2, 2);
  CHECK(r2.points.rows() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(std::abs(r2.points(i, 0)) - 1.0 / std::sqrt(3.0)) < 1e-14);
    CHECK(r2.weights[i] == doctest::Approx(1.0).epsilon(1e-14));
  }

  for (int dim = 1; dim <= 3; ++dim) {
    for (int n = 1; n <= 6; ++n) {
      QuadRule r = gauss_rule(dim, n);
      double vol = r.weights.sum();
      CHECK(vol == doctest::Approx(std::pow(2.0, dim)).epsilon(1e-13));
      for (const auto w : r.weights) CHECK(w > 0.0);
    }
  }
}

TEST_CASE("gauss exactness") {
  // int_-1^1 x^4 dx = 2/5 with n=3
  QuadRule r = gauss_rule(1, 3);
  double s = 0;
  for (int i = 0; i < r.points.rows(); ++i) s += r.weights[i] * std::pow(r.points(i, 0), 4);
  CHECK(s == doctest::Approx(0.4).epsilon(1e-14));

  // degree 2n-1 monomials integrated exactly for several n
  for (int n = 2; n <= 8; ++n) {
    QuadRule rn = gauss_rule(1, n);
    int deg = 2 * n - 2;  // even degree <= 2n-1
    double got = 0;
    for (int i = 0; i < rn.points.rows(); ++i)
      got += rn.weights[i] * std::pow(rn.points(i, 0), deg);
    double expect = 2.0 / (deg + 1);
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("lagrange 1d nodal and midpoint values") {
  Shape1D s = lagrange_1d(1, 0.0);
  CHECK(s.N[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.N[1] == doctest::Approx(0.5).epsilon(1e-15));

  for (int p = 1; p <= 6; ++p) {
    for (int i = 0; i <= p; ++i) {
      double xi = -1.0 + 2.0 * i / p;
      Shape1D sn = lagrange_1d(p, xi);
      for (int j = 0; j <= p; ++j) {
        CHECK(sn.N[j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("lagrange partition of unity and derivative sums") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int p = 1; p <= 6; ++p) {
    for (int trial = 0; trial < 5; ++trial) {
      double x = dist(rng);
      Shape1D s = lagrange_1d(p, x);
      CHECK(s.N.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(s.dN.sum()) < 1e-10);
      CHECK(std::abs(s.d2N.sum()) < 1e-9);
    }
  }
}

TEST_CASE("lagrange derivatives match finite differences") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-0.9, 0.9);
  const double h = 1e-5;
  for (int p = 1; p <= 5; ++p) {
    double x = dist(rng);
    Shape1D s = lagrange_1d(p, x);
    Shape1D sp = lagrange_1d(p, x + h);
    Shape1D sm = lagrange_1d(p, x - h);
    for (int i = 0; i <= p; ++i) {
      double fd1 = (sp.N[i] - sm.N[i]) / (2 * h);
      double fd2 = (sp.N[i] - 2 * s.N[i] + sm.N[i]) / (h * h);
      CHECK(s.dN[i] == doctest::Approx(fd1).epsilon(1e-8));
      CHECK(s.d2N[i] == doctest::Approx(fd2).epsilon(1e-4));
    }
  }
}

TEST_CASE("tensor-product shapes: partition of unity, FD check") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> dist(-0.9, 0.9);
  ShapeEval se, sp, sm;
  for (int q = 1; q <= 3; ++q) {
    for (int p = 1; p <= 3; ++p) {
      Vec xi(q);
      for (int k = 0; k < q; ++k) xi[k] = dist(rng);
      shape_eval(q, p, xi, true, se);
      CHECK(se.N.sum() == doctest::Approx(1.0).epsilon(1e-12));
      for (int k = 0; k < q; ++k) CHECK(std::abs(se.dN.col(k).sum()) < 1e-10);

      const double h = 1e-5;
      for (int k = 0; k < q; ++k) {
        Vec xp = xi, xm = xi;
        xp[k] += h;
        xm[k] -= h;
        shape_eval(q, p, xp, false, sp);
        shape_eval(q, p, xm, false, sm);
        for (int a = 0; a < se.N.size(); ++a) {
          double fd = (sp.N[a] - sm.N[a]) / (2 * h);
          CHECK(se.dN(a, k) == doctest::Approx(fd).epsilon(1e-7));
        }
      }
      // Hessian symmetric and matches FD of first derivatives
      for (int k = 0; k < q; ++k) {
        Vec xp = xi, xm = xi;
        xp[k] += h;
        xm[k] -= h;
        shape_eval(q, p, xp, false, sp);
        shape_eval(q, p, xm, false, sm);
        for (int a = 0; a < se.N.size(); ++a) {
          for (int l = 0; l < q; ++l) {
            double fd = (sp.dN(a, l) - sm.dN(a, l)) / (2 * h);
            CHECK(se.d2N[a](l, k) == doctest::Approx(fd).epsilon(1e-6));
          }
        }
      }
    }
  }
}

TEST_CASE("reference nodes reproduce nodal basis") {
  for (int q = 1; q <= 2; ++q) {
    int p = 3;
    Eigen::MatrixXd nodes = reference_nodes(q, p);
    ShapeEval se;
    for (int a = 0; a < nodes.rows(); ++a) {
      Vec xi = nodes.row(a).transpose();
      shape_eval(q, p, xi, false, se);
      for (int b = 0; b < nodes.rows(); ++b)
        CHECK(se.N[b] == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

namespace {
// random smooth matrix function of 2 variables for forward-mode checks
Mat test_matrix(double x, double y) {
  Mat m(3, 3);
  m << std::sin(x) + 2.0, x * y, y * y, std::cos(y), 3.0 + x * x, x + y, 0.3 * x, 0.1 * y,
      2.0 + std::sin(x * y);
  return m;
}

DMat test_dmat(double x, double y) {
  DMat a;
  a.nd = 2;
  a.v = test_matrix(x, y);
  Mat dx(3, 3), dy(3, 3);
  dx << std::cos(x), y, 0, 0, 2 * x, 1, 0.3, 0, y * std::cos(x * y);
  dy << 0, x, 2 * y, -std::sin(y), 0, 1, 0, 0.1, x * std::cos(x * y);
  a.d[0] = dx;
  a.d[1] = dy;
  return a;
}
}  // namespace

TEST_CASE("forward-mode matrix derivatives vs finite differences") {
  const double x = 0.37, y = -0.61, h = 1e-6;
  DMat a = test_dmat(x, y);

  // the chained expression exercised: C = (A^T A)^-1 * A, f = det(A), g = tr(C)
  DMat c = inverse(transpose(a) * a) * a;
  DScalar f = det(a);
  DScalar g = trace(c);
  DScalar s = sqrt(f * f) / f;  // == 1 with zero derivative (det > 0 here)
  CHECK(s.v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s.d[0]) < 1e-9);

  auto eval_c = [](double xx, double yy) {
    Mat m = test_matrix(xx, yy);
    Mat cc = (m.transpose() * m).inverse() * m;
    return cc;
  };
  for (int k = 0; k < 2; ++k) {
    double xp = x + (k == 0 ? h : 0), yp = y + (k == 1 ? h : 0);
    double xm = x - (k == 0 ? h : 0), ym = y - (k == 1 ? h : 0);
    Mat fd = (eval_c(xp, yp) - eval_c(xm, ym)) / (2 * h);
    CHECK((c.d[k] - fd).norm() < 1e-7 * (1.0 + fd.norm()));
    double fdet = (test_matrix(xp, yp).determinant() - test_matrix(xm, ym).determinant()) / (2 * h);
    CHECK(f.d[k] == doctest::Approx(fdet).epsilon(1e-6));
    double ftr = (eval_c(xp, yp).trace() - eval_c(xm, ym).trace()) / (2 * h);
    CHECK(g.d[k] == doctest::Approx(ftr).epsilon(1e-6));
  }
}

TEST_CASE("forward-mode scalar ops") {
  DScalar a = DScalar::constant(4.0, 1);
  a.d[0] = 2.0;
  DScalar r = sqrt(a);
  CHECK(r.v == doctest::Approx(2.0));
  CHECK(r.d[0] == doctest::Approx(0.5));  // 2/(2*2)
  DScalar q = a / r;
  CHECK(q.v == doctest::Approx(2.0));
  CHECK(q.d[0] == doctest::Approx((2.0 * 2.0 - 4.0 * 0.5) / 4.0));
  DScalar i = inv(a);
  CHECK(i.d[0] == doctest::Approx(-2.0 / 16.0));
}
