#include "tdcfem/cut_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tdcfem/lagrange.hpp"
#include "tdcfem/quadrature.hpp"

namespace tdcfem {
namespace {

constexpr double kSnap = 1e-14;    // relative corner snapping threshold
constexpr double kTolCut = 1e-12;  // normalized level-set tolerance at emitted points
constexpr int kNSub = 4;           // marching cells per axis
constexpr int kMaxDepth = 8;       // recursive subdivision limit
constexpr int kMaxNewton = 60;

// Capped sizes for the projection systems: d + number of constraints <= 5.
using Vec5 = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 5, 1>;
using Mat5 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 5, 5>;

// Corner values within kSnap of zero are pushed to the positive side, so the
// zero set of a level set that touches a cell corner or face is claimed by
// exactly one side and marching topology is unambiguous.
double snap(double v) { return std::abs(v) < kSnap ? kSnap : v; }

// One element's level-set polynomial evaluated in physical coordinates,
// normalized by the largest nodal magnitude.
class ElementPoly {
 public:
  ElementPoly(int d, int p, const Vec& lo, const Vec& hi, const Eigen::VectorXd& phi)
      : d_(d), p_(p), lo_(lo), hi_(hi) {
    if (phi.size() != n_basis(d, p))
      fail(ErrorCode::InvalidInput, "level-set nodal vector has wrong size");
    scale_ = phi.cwiseAbs().maxCoeff();
    if (!(scale_ > 0.0)) scale_ = 1.0;
    coef_ = phi / scale_;
    inv_h_ = Vec::Zero(d);
    for (int k = 0; k < d; ++k) {
      const double h = hi(k) - lo(k);
      if (!(h > 0.0)) fail(ErrorCode::InvalidInput, "empty element box");
      inv_h_(k) = 2.0 / h;
    }
  }

  int dim() const { return d_; }
  double diameter() const { return (hi_.head(d_) - lo_.head(d_)).norm(); }

  Vec to_ref(const Vec& X) const {
    Vec xi = Vec::Zero(d_);
    for (int k = 0; k < d_; ++k) xi(k) = (X(k) - lo_(k)) * inv_h_(k) - 1.0;
    return xi;
  }

  double value(const Vec& X) const {
    shape_eval(d_, p_, to_ref(X), false, sh_);
    return coef_.dot(sh_.N);
  }

  void eval(const Vec& X, double& v, Vec* g, Mat* H) const {
    shape_eval(d_, p_, to_ref(X), H != nullptr, sh_);
    v = coef_.dot(sh_.N);
    if (g) {
      *g = Vec::Zero(d_);
      for (int k = 0; k < d_; ++k) (*g)(k) = sh_.dN.col(k).dot(coef_) * inv_h_(k);
    }
    if (H) {
      *H = Mat::Zero(d_, d_);
      for (Eigen::Index a = 0; a < coef_.size(); ++a) *H += coef_(a) * sh_.d2N[a];
      for (int r = 0; r < d_; ++r)
        for (int c = 0; c < d_; ++c) (*H)(r, c) *= inv_h_(r) * inv_h_(c);
    }
  }

 private:
  int d_, p_;
  Vec lo_, hi_, inv_h_;
  Eigen::VectorXd coef_;
  double scale_;
  mutable ShapeEval sh_;
};

// Closest-point projection onto phi = 0. Newton on the stationarity system
//   [y - x + lambda grad phi(y); phi(y)] = 0
// with Jacobian [[I + lambda H, g], [g^T, 0]]. The converged map depends only
// on the seed and the element polynomial, so reconstruction pieces that share
// chord points lift them to identical surface points and the lifted patches
// tile the zero set without seams.
struct Projection {
  Vec y = Vec();
  double lambda = 0.0;
};

bool project_codim1(const ElementPoly& f, const Vec& seed, Projection& out) {
  const int d = f.dim();
  const double diam = f.diameter();
  Vec y = seed;
  double lambda = 0.0;
  double v = 0.0;
  Vec g;
  Mat H;
  for (int it = 0; it < kMaxNewton; ++it) {
    f.eval(y, v, &g, &H);
    Vec5 r(d + 1);
    r.head(d) = y - seed + lambda * g;
    r(d) = v;
    if (std::abs(v) <= kTolCut && r.head(d).norm() <= 1e-11 * diam) {
      out.y = y;
      out.lambda = lambda;
      return true;
    }
    Mat5 A(d + 1, d + 1);
    A.setZero();
    A.topLeftCorner(d, d) = Mat::Identity(d, d) + lambda * H;
    A.col(d).head(d) = g;
    A.row(d).head(d) = g.transpose();
    Eigen::FullPivLU<Mat5> lu(A);
    if (!lu.isInvertible()) return false;
    const Vec5 delta = lu.solve((-r).eval());
    y += delta.head(d);
    lambda += delta(d);
    if ((y - seed).norm() > diam) return false;
  }
  return false;
}

// Derivative of the projected point when the seed moves by dx: solve the same
// linearized system against [dx; 0]. Exact tangent of the lifted
// parametrization, used for quadrature weights.
Vec projection_tangent_codim1(const ElementPoly& f, const Projection& pr, const Vec& dx) {
  const int d = f.dim();
  double v = 0.0;
  Vec g;
  Mat H;
  f.eval(pr.y, v, &g, &H);
  Mat5 A(d + 1, d + 1);
  A.setZero();
  A.topLeftCorner(d, d) = Mat::Identity(d, d) + pr.lambda * H;
  A.col(d).head(d) = g;
  A.row(d).head(d) = g.transpose();
  Eigen::FullPivLU<Mat5> lu(A);
  if (!lu.isInvertible())
    fail(ErrorCode::NonConvergedCut, "singular projection tangent system");
  Vec5 rhs(d + 1);
  rhs.head(d) = dx;
  rhs(d) = 0.0;
  const Vec5 sol = lu.solve(rhs);
  return sol.head(d);
}

// Codim-2 analogue with two constraints and two multipliers.
struct Projection2 {
  Vec y = Vec();
  double l1 = 0.0, l2 = 0.0;
};

bool project_codim2(const ElementPoly& f1, const ElementPoly& f2, const Vec& seed,
                    Projection2& out) {
  const double diam = f1.diameter();
  Vec y = seed;
  double l1 = 0.0, l2 = 0.0;
  double v1 = 0.0, v2 = 0.0;
  Vec g1, g2;
  Mat H1, H2;
  for (int it = 0; it < kMaxNewton; ++it) {
    f1.eval(y, v1, &g1, &H1);
    f2.eval(y, v2, &g2, &H2);
    Vec5 r(5);
    r.head(3) = y - seed + l1 * g1 + l2 * g2;
    r(3) = v1;
    r(4) = v2;
    if (std::abs(v1) <= kTolCut && std::abs(v2) <= kTolCut &&
        r.head(3).norm() <= 1e-11 * diam) {
      out.y = y;
      out.l1 = l1;
      out.l2 = l2;
      return true;
    }
    Mat5 A(5, 5);
    A.setZero();
    A.topLeftCorner(3, 3) = Mat::Identity(3, 3) + l1 * H1 + l2 * H2;
    A.col(3).head(3) = g1;
    A.col(4).head(3) = g2;
    A.row(3).head(3) = g1.transpose();
    A.row(4).head(3) = g2.transpose();
    Eigen::FullPivLU<Mat5> lu(A);
    if (!lu.isInvertible()) return false;
    const Vec5 delta = lu.solve((-r).eval());
    y += delta.head(3);
    l1 += delta(3);
    l2 += delta(4);
    if ((y - seed).norm() > diam) return false;
  }
  return false;
}

Vec projection_tangent_codim2(const ElementPoly& f1, const ElementPoly& f2,
                              const Projection2& pr, const Vec& dx) {
  double v1 = 0.0, v2 = 0.0;
  Vec g1, g2;
  Mat H1, H2;
  f1.eval(pr.y, v1, &g1, &H1);
  f2.eval(pr.y, v2, &g2, &H2);
  Mat5 A(5, 5);
  A.setZero();
  A.topLeftCorner(3, 3) = Mat::Identity(3, 3) + pr.l1 * H1 + pr.l2 * H2;
  A.col(3).head(3) = g1;
  A.col(4).head(3) = g2;
  A.row(3).head(3) = g1.transpose();
  A.row(4).head(3) = g2.transpose();
  Eigen::FullPivLU<Mat5> lu(A);
  if (!lu.isInvertible())
    fail(ErrorCode::NonConvergedCut, "singular projection tangent system");
  Vec5 rhs = Vec5::Zero(5);
  rhs.head(3) = dx;
  const Vec5 sol = lu.solve(rhs);
  return sol.head(3);
}

// Chord simplex of the linear pre-triangulation: segment (nv = 2) in 2D,
// triangle (nv = 3) in 3D.
struct Piece {
  Vec a = Vec(), b = Vec(), c = Vec();
  int nv = 0;
};

Vec edge_zero(const Vec& A, const Vec& B, double va, double vb) {
  // snapped endpoints were exact zeros; keep the crossing exactly there so
  // zero sets aligned with cell faces are reproduced without bias
  if (std::abs(va) <= kSnap) return A;
  if (std::abs(vb) <= kSnap) return B;
  const double t = va / (va - vb);
  return A + t * (B - A);
}

void march_triangle(const Vec& A, const Vec& B, const Vec& C, double va, double vb,
                    double vc, std::vector<Piece>& out) {
  const bool sa = va > 0.0, sb = vb > 0.0, sc = vc > 0.0;
  if (sa == sb && sb == sc) return;
  const Vec* P[3] = {&A, &B, &C};
  const double v[3] = {va, vb, vc};
  int lone = 2;
  if (sa != sb && sa != sc) lone = 0;
  else if (sb != sa && sb != sc) lone = 1;
  const int o1 = (lone + 1) % 3, o2 = (lone + 2) % 3;
  Piece pc;
  pc.nv = 2;
  pc.a = edge_zero(*P[lone], *P[o1], v[lone], v[o1]);
  pc.b = edge_zero(*P[lone], *P[o2], v[lone], v[o2]);
  out.push_back(pc);
}

void march_tet(const std::array<Vec, 4>& P, const std::array<double, 4>& v,
               std::vector<Piece>& out) {
  std::array<int, 4> neg{}, pos{};
  int nn = 0, np = 0;
  for (int i = 0; i < 4; ++i) {
    if (v[i] < 0.0) neg[nn++] = i;
    else pos[np++] = i;
  }
  if (nn == 0 || nn == 4) return;
  if (nn == 1 || nn == 3) {
    const int lone = (nn == 1) ? neg[0] : pos[0];
    const std::array<int, 4>& rest = (nn == 1) ? pos : neg;
    Piece pc;
    pc.nv = 3;
    pc.a = edge_zero(P[lone], P[rest[0]], v[lone], v[rest[0]]);
    pc.b = edge_zero(P[lone], P[rest[1]], v[lone], v[rest[1]]);
    pc.c = edge_zero(P[lone], P[rest[2]], v[lone], v[rest[2]]);
    out.push_back(pc);
  } else {
    // two-vs-two: quad cut, split along one diagonal
    const int a = neg[0], b = neg[1], c = pos[0], d = pos[1];
    const Vec pac = edge_zero(P[a], P[c], v[a], v[c]);
    const Vec pad = edge_zero(P[a], P[d], v[a], v[d]);
    const Vec pbc = edge_zero(P[b], P[c], v[b], v[c]);
    const Vec pbd = edge_zero(P[b], P[d], v[b], v[d]);
    Piece t1;
    t1.nv = 3;
    t1.a = pac;
    t1.b = pbc;
    t1.c = pbd;
    out.push_back(t1);
    Piece t2;
    t2.nv = 3;
    t2.a = pac;
    t2.b = pbd;
    t2.c = pad;
    out.push_back(t2);
  }
}

// Kuhn decomposition of the cube into six tets sharing the main diagonal 0-7.
// Corner index c = x + 2 y + 4 z. Face diagonals match across neighbouring
// cells, so the pre-triangulation is crack-free.
constexpr int kKuhnTets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                                 {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};

class CutBuilder {
 public:
  CutBuilder(int d, int p, const Vec& lo, const Vec& hi, const Eigen::VectorXd& phi,
             int order, const Eigen::VectorXd* psi, const std::array<bool, 6>* faces)
      : d_(d), p_(p), order_(std::max(order, 1)), lo_(lo), hi_(hi),
        f_(d, p, lo, hi, phi) {
    if (psi) psi_.emplace(d, p, lo, hi, *psi);
    if (faces) faces_ = *faces;
    gauss_legendre_1d(order_, gx_, gw_);
  }

  CutCellQuadrature build() {
    Vec clo(d_), chi(d_);
    std::array<int, 3> idx{};
    const int ncell = d_ == 2 ? kNSub * kNSub : kNSub * kNSub * kNSub;
    for (int c = 0; c < ncell; ++c) {
      int rem = c;
      for (int k = 0; k < d_; ++k) {
        idx[k] = rem % kNSub;
        rem /= kNSub;
      }
      for (int k = 0; k < d_; ++k) {
        const double h = (hi_(k) - lo_(k)) / kNSub;
        clo(k) = lo_(k) + idx[k] * h;
        chi(k) = clo(k) + h;
      }
      process_cell(clo, chi, 0);
    }
    if (weights_.empty())
      fail(ErrorCode::NoIntersection, "level set does not cut the element");
    if (d_ == 2) face_boundary_points();
    CutCellQuadrature out;
    const int n = static_cast<int>(weights_.size());
    out.points_ref.resize(n, d_);
    out.points_x.resize(n, d_);
    out.weights.resize(n);
    for (int i = 0; i < n; ++i) {
      out.points_x.row(i) = points_[i].head(d_).transpose();
      out.points_ref.row(i) = f_.to_ref(points_[i]).transpose();
      out.weights(i) = weights_[i];
    }
    out.boundary = std::move(boundary_);
    out.order = order_;
    return out;
  }

 private:
  void process_cell(const Vec& clo, const Vec& chi, int depth) {
    const int nc = 1 << d_;
    std::array<Vec, 8> P;
    std::array<double, 8> V{};
    for (int c = 0; c < nc; ++c) {
      Vec X(d_);
      for (int k = 0; k < d_; ++k) X(k) = (c >> k & 1) ? chi(k) : clo(k);
      P[c] = X;
      V[c] = snap(f_.value(X));
    }
    std::vector<Piece> pieces;
    if (d_ == 2) {
      const Vec C = 0.5 * (clo + chi);
      const double vc = snap(f_.value(C));
      const int cycle[5] = {0, 1, 3, 2, 0};
      for (int e = 0; e < 4; ++e)
        march_triangle(P[cycle[e]], P[cycle[e + 1]], C, V[cycle[e]], V[cycle[e + 1]], vc,
                       pieces);
    } else {
      for (const auto& tet : kKuhnTets) {
        march_tet({P[tet[0]], P[tet[1]], P[tet[2]], P[tet[3]]},
                  {V[tet[0]], V[tet[1]], V[tet[2]], V[tet[3]]}, pieces);
      }
    }
    if (pieces.empty()) return;
    const double sliver = 1e-12 * f_.diameter();
    const std::size_t mark_w = weights_.size();
    const std::size_t mark_b = boundary_.size();
    try {
      for (const auto& pc : pieces) {
        if (pc.nv == 2) {
          if ((pc.b - pc.a).norm() < sliver) continue;
          emit_segment(pc.a, pc.b);
        } else {
          if ((pc.b - pc.a).norm() < sliver || (pc.c - pc.a).norm() < sliver ||
              (pc.c - pc.b).norm() < sliver)
            continue;
          emit_triangle(pc.a, pc.b, pc.c, 0);
        }
      }
    } catch (const Error& e) {
      const bool retryable = e.code() == ErrorCode::NonConvergedCut ||
                             e.code() == ErrorCode::DegenerateCut;
      if (!retryable) throw;
      if (depth >= kMaxDepth)
        fail(ErrorCode::DegenerateCut,
             std::string("cut reconstruction failed after max subdivision: ") + e.what());
      weights_.resize(mark_w);
      points_.resize(mark_w);
      boundary_.resize(mark_b);
      const Vec mid = 0.5 * (clo + chi);
      for (int c = 0; c < nc; ++c) {
        Vec slo(d_), shi(d_);
        for (int k = 0; k < d_; ++k) {
          slo(k) = (c >> k & 1) ? mid(k) : clo(k);
          shi(k) = (c >> k & 1) ? chi(k) : mid(k);
        }
        process_cell(slo, shi, depth + 1);
      }
    }
  }

  // psi value on the zero set near x (projects first)
  double psi_on_surface(const Vec& x) const {
    Projection pr;
    if (!project_codim1(f_, x, pr))
      fail(ErrorCode::NonConvergedCut, "projection failed during clipping");
    return snap(psi_->value(pr.y));
  }

  void emit_segment(const Vec& a, const Vec& b) {
    std::vector<std::pair<double, double>> kept;
    std::vector<double> roots;
    if (!psi_) {
      kept.emplace_back(0.0, 1.0);
    } else {
      clip_params(a, b, kept, roots);
    }
    const Vec chord = b - a;
    for (const auto& [s0, s1] : kept) {
      for (int i = 0; i < order_; ++i) {
        const double s = s0 + (s1 - s0) * 0.5 * (gx_(i) + 1.0);
        const double wq = gw_(i) * 0.5 * (s1 - s0);
        Projection pr;
        if (!project_codim1(f_, Vec(a + s * chord), pr))
          fail(ErrorCode::NonConvergedCut, "segment point projection failed");
        const Vec dy = projection_tangent_codim1(f_, pr, chord);
        points_.push_back(pr.y);
        weights_.push_back(wq * dy.norm());
      }
    }
    for (double s : roots) {
      Projection pr;
      if (!project_codim1(f_, Vec(a + s * chord), pr))
        fail(ErrorCode::NonConvergedCut, "clip boundary projection failed");
      double v = 0.0;
      Vec gpsi;
      psi_->eval(pr.y, v, &gpsi, nullptr);
      const double gn = gpsi.norm();
      if (gn <= kDegenerateTol)
        fail(ErrorCode::DegenerateCut, "vanishing clip gradient at boundary point");
      CutCellQuadrature::BoundaryPoint bp;
      bp.X = pr.y;
      bp.xi = f_.to_ref(pr.y);
      bp.w = 1.0;
      bp.outward = gpsi / gn;
      boundary_.push_back(bp);
    }
  }

  // kept sub-intervals of [0,1] where psi <= 0 on the lifted segment, and the
  // clip roots separating them
  void clip_params(const Vec& a, const Vec& b, std::vector<std::pair<double, double>>& kept,
                   std::vector<double>& roots) {
    const Vec chord = b - a;
    const int ns = 2 * kNSub;
    std::vector<double> s(ns + 1), val(ns + 1);
    for (int j = 0; j <= ns; ++j) {
      s[j] = static_cast<double>(j) / ns;
      val[j] = psi_on_surface(a + s[j] * chord);
    }
    for (int j = 0; j < ns; ++j) {
      if (val[j] * val[j + 1] < 0.0) {
        double s0 = s[j], s1 = s[j + 1], v0 = val[j];
        for (int it = 0; it < 80; ++it) {
          const double sm = 0.5 * (s0 + s1);
          const double vm = psi_on_surface(a + sm * chord);
          if ((vm < 0.0) == (v0 < 0.0)) {
            s0 = sm;
            v0 = vm;
          } else {
            s1 = sm;
          }
        }
        roots.push_back(0.5 * (s0 + s1));
      }
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> walls;
    walls.push_back(0.0);
    walls.insert(walls.end(), roots.begin(), roots.end());
    walls.push_back(1.0);
    for (std::size_t j = 0; j + 1 < walls.size(); ++j) {
      if (walls[j + 1] - walls[j] < 1e-13) continue;
      const double sm = 0.5 * (walls[j] + walls[j + 1]);
      if (psi_on_surface(a + sm * chord) <= 0.0) kept.emplace_back(walls[j], walls[j + 1]);
    }
  }

  void emit_triangle(const Vec& a, const Vec& b, const Vec& c, int clip_depth) {
    if (psi_) {
      const double sliver = 1e-12 * f_.diameter();
      if ((b - a).norm() < sliver || (c - a).norm() < sliver || (c - b).norm() < sliver)
        return;
      const double va = psi_on_surface(a), vb = psi_on_surface(b), vc = psi_on_surface(c);
      const bool in_a = va < 0.0, in_b = vb < 0.0, in_c = vc < 0.0;
      if (in_a == in_b && in_b == in_c) {
        if (!in_a) return;
      } else if (clip_depth < kMaxDepth) {
        // split along the linear estimate of the clip line and recurse; the
        // crossing estimates converge to psi = 0 so leftover slivers at the
        // depth limit carry negligible area
        const Vec* P[3] = {&a, &b, &c};
        const double v[3] = {va, vb, vc};
        int lone = 2;
        if (in_a != in_b && in_a != in_c) lone = 0;
        else if (in_b != in_a && in_b != in_c) lone = 1;
        const int o1 = (lone + 1) % 3, o2 = (lone + 2) % 3;
        const Vec e1 = edge_zero(*P[lone], *P[o1], v[lone], v[o1]);
        const Vec e2 = edge_zero(*P[lone], *P[o2], v[lone], v[o2]);
        emit_triangle(*P[lone], e1, e2, clip_depth + 1);
        emit_triangle(e1, *P[o1], *P[o2], clip_depth + 1);
        emit_triangle(e1, *P[o2], e2, clip_depth + 1);
        return;
      } else {
        if (psi_on_surface(Vec((a + b + c) / 3.0)) > 0.0) return;
      }
    }
    const Vec e1 = b - a, e2 = c - a;
    for (int i = 0; i < order_; ++i) {
      for (int j = 0; j < order_; ++j) {
        // Duffy map of the tensor rule onto the unit triangle
        const double u = 0.5 * (gx_(i) + 1.0);
        const double v = 0.5 * (gx_(j) + 1.0) * (1.0 - u);
        const double wq = 0.25 * gw_(i) * gw_(j) * (1.0 - u);
        Projection pr;
        if (!project_codim1(f_, Vec(a + u * e1 + v * e2), pr))
          fail(ErrorCode::NonConvergedCut, "triangle point projection failed");
        const Vec t1 = projection_tangent_codim1(f_, pr, e1);
        const Vec t2 = projection_tangent_codim1(f_, pr, e2);
        const Eigen::Vector3d u3(t1(0), t1(1), t1(2));
        const Eigen::Vector3d v3(t2(0), t2(1), t2(2));
        points_.push_back(pr.y);
        weights_.push_back(wq * u3.cross(v3).norm());
      }
    }
  }

  // Intersections of the curve with requested box faces (d = 2): bracketed
  // bisection of phi along the face edge.
  void face_boundary_points() {
    for (int face = 0; face < 4; ++face) {
      if (!faces_[face]) continue;
      const int axis = face / 2;
      const int other = 1 - axis;
      Vec A(2), B(2);
      A(axis) = B(axis) = (face % 2) ? hi_(axis) : lo_(axis);
      A(other) = lo_(other);
      B(other) = hi_(other);
      Vec m = Vec::Zero(2);
      m(axis) = (face % 2) ? 1.0 : -1.0;
      const int ns = 4 * p_ + 4;
      std::vector<double> t(ns + 1), val(ns + 1);
      for (int j = 0; j <= ns; ++j) {
        t[j] = static_cast<double>(j) / ns;
        val[j] = f_.value(A + t[j] * (B - A));
      }
      std::vector<double> roots;
      for (int j = 0; j <= ns; ++j)
        if (std::abs(val[j]) <= kTolCut) roots.push_back(t[j]);
      for (int j = 0; j < ns; ++j) {
        if (val[j] * val[j + 1] < 0.0) {
          double t0 = t[j], t1 = t[j + 1], v0 = val[j];
          for (int it = 0; it < 100; ++it) {
            const double tm = 0.5 * (t0 + t1);
            const double vm = f_.value(A + tm * (B - A));
            if (std::abs(vm) <= kTolCut) {
              t0 = t1 = tm;
              break;
            }
            if ((vm < 0.0) == (v0 < 0.0)) {
              t0 = tm;
              v0 = vm;
            } else {
              t1 = tm;
            }
          }
          const double tr = 0.5 * (t0 + t1);
          if (std::abs(f_.value(Vec(A + tr * (B - A)))) > kTolCut)
            fail(ErrorCode::NonConvergedCut, "face crossing bisection stalled");
          roots.push_back(tr);
        }
      }
      std::sort(roots.begin(), roots.end());
      double last = -1.0;
      for (double tr : roots) {
        if (tr - last < 1e-10) continue;
        last = tr;
        const Vec y = A + tr * (B - A);
        if (psi_ && psi_->value(y) > 0.0) continue;
        CutCellQuadrature::BoundaryPoint bp;
        bp.X = y;
        bp.xi = f_.to_ref(y);
        bp.w = 1.0;
        bp.outward = m;
        boundary_.push_back(bp);
      }
    }
  }

  int d_, p_, order_;
  Vec lo_, hi_;
  ElementPoly f_;
  std::optional<ElementPoly> psi_;
  std::array<bool, 6> faces_{};
  Eigen::VectorXd gx_, gw_;
  std::vector<Vec> points_;
  std::vector<double> weights_;
  std::vector<CutCellQuadrature::BoundaryPoint> boundary_;
};

// Codim-2 path: seeds where both zero sets cross an element face, joined by a
// chord and lifted with the two-constraint projection.
void face_seeds_codim2(const ElementPoly& f1, const ElementPoly& f2, const Vec& lo,
                       const Vec& hi, int p, int face, std::vector<Vec>& out) {
  const int axis = face / 2;
  const double fixed = (face % 2) ? hi(axis) : lo(axis);
  const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
  const int n = 4 * p + 4;
  auto at = [&](double i, double j) {
    Vec X(3);
    X(axis) = fixed;
    X(a1) = lo(a1) + (hi(a1) - lo(a1)) * i / n;
    X(a2) = lo(a2) + (hi(a2) - lo(a2)) * j / n;
    return X;
  };
  Eigen::MatrixXd v1(n + 1, n + 1), v2(n + 1, n + 1);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      v1(i, j) = snap(f1.value(at(i, j)));
      v2(i, j) = snap(f2.value(at(i, j)));
    }
  const double h1 = hi(a1) - lo(a1), h2 = hi(a2) - lo(a2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      auto crosses = [&](const Eigen::MatrixXd& v) {
        const double mn = std::min(std::min(v(i, j), v(i + 1, j)),
                                   std::min(v(i, j + 1), v(i + 1, j + 1)));
        const double mx = std::max(std::max(v(i, j), v(i + 1, j)),
                                   std::max(v(i, j + 1), v(i + 1, j + 1)));
        return mn < 0.0 && mx > 0.0;
      };
      if (!crosses(v1) || !crosses(v2)) continue;
      Vec X = at(i + 0.5, j + 0.5);
      bool ok = false;
      for (int it = 0; it < kMaxNewton; ++it) {
        double w1 = 0.0, w2 = 0.0;
        Vec g1, g2;
        f1.eval(X, w1, &g1, nullptr);
        f2.eval(X, w2, &g2, nullptr);
        if (std::abs(w1) <= kTolCut && std::abs(w2) <= kTolCut) {
          ok = true;
          break;
        }
        Eigen::Matrix2d J;
        J << g1(a1), g1(a2), g2(a1), g2(a2);
        if (std::abs(J.determinant()) < 1e-300) break;
        const Eigen::Vector2d dd = J.partialPivLu().solve(Eigen::Vector2d(-w1, -w2));
        X(a1) += dd(0);
        X(a2) += dd(1);
        if (X(a1) < lo(a1) - h1 || X(a1) > hi(a1) + h1 || X(a2) < lo(a2) - h2 ||
            X(a2) > hi(a2) + h2)
          break;
      }
      if (!ok) continue;
      const double m1 = 1e-9 * h1, m2 = 1e-9 * h2;
      if (X(a1) < lo(a1) - m1 || X(a1) > hi(a1) + m1 || X(a2) < lo(a2) - m2 ||
          X(a2) > hi(a2) + m2)
        continue;
      out.push_back(X);
    }
  }
}

CutCellQuadrature build_codim2(int p, const Vec& lo, const Vec& hi,
                               const Eigen::VectorXd& phi, const Eigen::VectorXd& phi2,
                               int order, const std::array<bool, 6>* faces) {
  const ElementPoly f1(3, p, lo, hi, phi);
  const ElementPoly f2(3, p, lo, hi, phi2);
  const double diam = f1.diameter();
  std::vector<Vec> seeds;
  for (int face = 0; face < 6; ++face) {
    std::vector<Vec> cand;
    face_seeds_codim2(f1, f2, lo, hi, p, face, cand);
    for (const Vec& X : cand) {
      bool dup = false;
      for (const Vec& Y : seeds)
        if ((X - Y).norm() < 1e-8 * diam) dup = true;
      if (!dup) seeds.push_back(X);
    }
  }
  if (seeds.empty())
    fail(ErrorCode::NoIntersection, "codim-2 level sets do not cut the element");
  if (seeds.size() != 2)
    fail(ErrorCode::DegenerateCut, "codim-2 cut has " + std::to_string(seeds.size()) +
                                       " face crossings, expected 2");
  const int nq = std::max(order, 1);
  Eigen::VectorXd gx, gw;
  gauss_legendre_1d(nq, gx, gw);
  const Vec chord = seeds[1] - seeds[0];
  CutCellQuadrature out;
  std::vector<Vec> pts;
  std::vector<double> wts;
  for (int seg = 0; seg < kNSub; ++seg) {
    const double s0 = static_cast<double>(seg) / kNSub;
    const double s1 = static_cast<double>(seg + 1) / kNSub;
    for (int i = 0; i < nq; ++i) {
      const double s = s0 + (s1 - s0) * 0.5 * (gx(i) + 1.0);
      const double wq = gw(i) * 0.5 * (s1 - s0);
      Projection2 pr;
      if (!project_codim2(f1, f2, Vec(seeds[0] + s * chord), pr))
        fail(ErrorCode::NonConvergedCut, "codim-2 point projection failed");
      const Vec dy = projection_tangent_codim2(f1, f2, pr, chord);
      pts.push_back(pr.y);
      wts.push_back(wq * dy.norm());
    }
  }
  const int n = static_cast<int>(wts.size());
  out.points_ref.resize(n, 3);
  out.points_x.resize(n, 3);
  out.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    out.points_x.row(i) = pts[i].transpose();
    out.points_ref.row(i) = f1.to_ref(pts[i]).transpose();
    out.weights(i) = wts[i];
  }
  if (faces) {
    for (const Vec& X : seeds) {
      for (int face = 0; face < 6; ++face) {
        if (!(*faces)[face]) continue;
        const int axis = face / 2;
        const double bound = (face % 2) ? hi(axis) : lo(axis);
        if (std::abs(X(axis) - bound) > 1e-9 * (hi(axis) - lo(axis))) continue;
        CutCellQuadrature::BoundaryPoint bp;
        bp.X = X;
        bp.xi = f1.to_ref(X);
        bp.w = 1.0;
        bp.outward = Vec::Zero(3);
        bp.outward(axis) = (face % 2) ? 1.0 : -1.0;
        out.boundary.push_back(bp);
      }
    }
  }
  out.order = nq;
  return out;
}

}  // namespace

CutCellQuadrature cut_element_quadrature(int d, int p, const Vec& box_lo,
                                         const Vec& box_hi, const Eigen::VectorXd& phi,
                                         int order, const Eigen::VectorXd* phi2,
                                         const Eigen::VectorXd* psi,
                                         const std::array<bool, 6>* cut_faces) {
  if (d != 2 && d != 3) fail(ErrorCode::InvalidInput, "cut quadrature needs d in {2,3}");
  if (p < 1) fail(ErrorCode::UnsupportedOrder, "cut quadrature needs order p >= 1");
  if (phi2) {
    if (d != 3) fail(ErrorCode::InvalidInput, "codim-2 cuts need d = 3");
    if (psi) fail(ErrorCode::InvalidInput, "psi clipping of codim-2 cuts not supported");
    return build_codim2(p, box_lo, box_hi, phi, *phi2, order, cut_faces);
  }
  CutBuilder builder(d, p, box_lo, box_hi, phi, order, psi, cut_faces);
  return builder.build();
}

}  // namespace tdcfem
