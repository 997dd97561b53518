#pragma once

#include <cmath>

#include "tdcfem/core.hpp"

namespace tdcfem {

// Scalar and small-matrix values carrying up to three directional
// derivatives, propagated by forward-mode rules. Used for the strong-form
// surface divergence of stress, which needs derivatives of the whole
// frame -> strain -> stress chain with respect to reference or ambient
// coordinates.

struct DScalar {
  double v = 0.0;
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  int nd = 0;

  static DScalar constant(double value, int nd) {
    DScalar s;
    s.v = value;
    s.nd = nd;
    return s;
  }
};

struct DMat {
  Mat v;
  Mat d[3];
  int nd = 0;

  static DMat constant(const Mat& m, int nd) {
    DMat a;
    a.v = m;
    a.nd = nd;
    for (int k = 0; k < nd; ++k) a.d[k].setZero(m.rows(), m.cols());
    return a;
  }
  static DMat identity(int dim, int nd) { return constant(Mat::Identity(dim, dim), nd); }
  static DMat zero(int rows, int cols, int nd) { return constant(Mat::Zero(rows, cols), nd); }
};

inline DScalar operator+(const DScalar& a, const DScalar& b) {
  DScalar c;
  c.v = a.v + b.v;
  c.d = a.d + b.d;
  c.nd = a.nd;
  return c;
}

inline DScalar operator-(const DScalar& a, const DScalar& b) {
  DScalar c;
  c.v = a.v - b.v;
  c.d = a.d - b.d;
  c.nd = a.nd;
  return c;
}

inline DScalar operator*(const DScalar& a, const DScalar& b) {
  DScalar c;
  c.v = a.v * b.v;
  c.d = a.d * b.v + b.d * a.v;
  c.nd = a.nd;
  return c;
}

inline DScalar operator*(double s, const DScalar& a) {
  DScalar c;
  c.v = s * a.v;
  c.d = s * a.d;
  c.nd = a.nd;
  return c;
}

inline DScalar operator/(const DScalar& a, const DScalar& b) {
  DScalar c;
  c.v = a.v / b.v;
  c.d = (a.d - c.v * b.d) / b.v;
  c.nd = a.nd;
  return c;
}

inline DScalar sqrt(const DScalar& a) {
  DScalar c;
  c.v = std::sqrt(a.v);
  c.d = a.d / (2.0 * c.v);
  c.nd = a.nd;
  return c;
}

inline DScalar inv(const DScalar& a) {
  DScalar c;
  c.v = 1.0 / a.v;
  c.d = -a.d / (a.v * a.v);
  c.nd = a.nd;
  return c;
}

inline DMat operator+(const DMat& a, const DMat& b) {
  DMat c;
  c.v = a.v + b.v;
  c.nd = a.nd;
  for (int k = 0; k < c.nd; ++k) c.d[k] = a.d[k] + b.d[k];
  return c;
}

inline DMat operator-(const DMat& a, const DMat& b) {
  DMat c;
  c.v = a.v - b.v;
  c.nd = a.nd;
  for (int k = 0; k < c.nd; ++k) c.d[k] = a.d[k] - b.d[k];
  return c;
}

inline DMat operator*(const DMat& a, const DMat& b) {
  DMat c;
  c.v = a.v * b.v;
  c.nd = a.nd;
  for (int k = 0; k < c.nd; ++k) c.d[k] = a.d[k] * b.v + a.v * b.d[k];
  return c;
}

inline DMat operator*(double s, const DMat& a) {
  DMat c;
  c.v = s * a.v;
  c.nd = a.nd;
  for (int k = 0; k < c.nd; ++k) c.d[k] = s * a.d[k];
  return c;
}

inline DMat operator*(const DScalar& s, const DMat& a) {
  DMat c;
  c.v = s.v * a.v;
  c.nd = a.nd;
  for (int k = 0; k < c.nd; ++k) c.d[k] = s.v * a.d[k] + s.d[k] * a.v;
  return c;
}

inline DMat transpose(const DMat& a) {
  DMat c;
  c.v = a.v.transpose();
  c.nd = a.nd;
  for (int k = 0; k < c.nd; ++k) c.d[k] = a.d[k].transpose();
  return c;
}

inline DMat inverse(const DMat& a) {
  DMat c;
  Mat ainv = a.v.inverse();
  c.v = ainv;
  c.nd = a.nd;
  for (int k = 0; k < c.nd; ++k) c.d[k] = -ainv * a.d[k] * ainv;
  return c;
}

inline DScalar trace(const DMat& a) {
  DScalar c;
  c.v = a.v.trace();
  c.nd = a.nd;
  for (int k = 0; k < c.nd; ++k) c.d[k] = a.d[k].trace();
  return c;
}

// d(det A) = det A * tr(A^-1 dA)
inline DScalar det(const DMat& a) {
  DScalar c;
  c.v = a.v.determinant();
  c.nd = a.nd;
  Mat ainv = a.v.inverse();
  for (int k = 0; k < c.nd; ++k) c.d[k] = c.v * (ainv * a.d[k]).trace();
  return c;
}

}  // namespace tdcfem
