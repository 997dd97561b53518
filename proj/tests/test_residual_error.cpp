#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tdcfem/residual_error.hpp"
#include "tdcfem/solver.hpp"

using namespace tdcfem;

namespace {

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

double rope_height(double X) { return 0.5 * (1.0 - X) - std::sin(M_PI * X) / 7.0; }
double rope_height_d(double X) { return -0.5 - M_PI * std::cos(M_PI * X) / 7.0; }

ParametricPatch sag_rope_patch() {
  ParametricPatch p;
  p.q = 1;
  p.d = 2;
  p.map = [](const Vec& r) {
    Vec X(2);
    X << r[0], rope_height(r[0]);
    return X;
  };
  p.map_jacobian = [](const Vec& r) {
    Mat J(2, 1);
    J << 1.0, rope_height_d(r[0]);
    return J;
  };
  p.ref_lo = Vec::Zero(1);
  p.ref_hi = Vec::Ones(1);
  return p;
}

ParametricPatch flat_patch3() {
  ParametricPatch p;
  p.q = 2;
  p.d = 3;
  p.map = [](const Vec& r) {
    Vec X(3);
    X << r[0], r[1], 0.0;
    return X;
  };
  p.map_jacobian = [](const Vec&) {
    Mat J(3, 2);
    J << 1, 0, 0, 1, 0, 0;
    return J;
  };
  p.ref_lo = Vec::Zero(2);
  p.ref_hi = Vec::Ones(2);
  return p;
}

ParametricPatch sphere_patch(double r0, double r1, double s0, double s1) {
  ParametricPatch p;
  p.q = 2;
  p.d = 3;
  p.map = [](const Vec& r) {
    Vec X(3);
    X << std::cos(r[0]) * std::cos(r[1]), std::sin(r[0]) * std::cos(r[1]), std::sin(r[1]);
    return X;
  };
  p.map_jacobian = [](const Vec& r) {
    Mat J(3, 2);
    J << -std::sin(r[0]) * std::cos(r[1]), -std::cos(r[0]) * std::sin(r[1]),
        std::cos(r[0]) * std::cos(r[1]), -std::sin(r[0]) * std::sin(r[1]), 0.0, std::cos(r[1]);
    return J;
  };
  p.ref_lo = Vec(2);
  p.ref_lo << r0, s0;
  p.ref_hi = Vec(2);
  p.ref_hi << r1, s1;
  return p;
}

// pointwise stress and frame from element data by plain arithmetic, used as
// the finite-difference oracle for the propagated-derivative implementation
struct PlainState {
  Mat sigma, K, Q, q_op;
  double Lambda;
};
PlainState plain_state(int q, int d, const MaterialModel& mat, double s0, const Vec& xi, int p,
                       const Eigen::MatrixXd& Xe, const Eigen::MatrixXd& Ue) {
  ShapeEval sh;
  shape_eval(q, p, xi, false, sh);
  Mat J = Xe.transpose() * sh.dN;
  Mat H = Ue.transpose() * sh.dN;
  Mat G = J.transpose() * J;
  Mat Q = J * G.inverse();
  Mat P = Q * J.transpose();
  Mat F = Mat::Identity(d, d) + H * Q.transpose();
  Mat E = 0.5 * (F.transpose() * F - Mat::Identity(d, d));
  Mat Et = P * E * P;
  Mat S = mat.lambda * Et.trace() * P + 2.0 * mat.mu * Et + s0 * P;
  Mat j = J + H;
  Mat g = j.transpose() * j;
  PlainState out;
  out.Lambda = std::sqrt(g.determinant() / G.determinant());
  out.sigma = (F * S * F.transpose()) / out.Lambda;
  out.K = F * S;
  out.Q = Q;
  out.q_op = j * g.inverse();
  return out;
}

void gather(const SurfaceProblem& prob, const Eigen::VectorXd& ufull, int part, int elem,
            Eigen::MatrixXd& Xe, Eigen::MatrixXd& Ue) {
  const SurfaceMesh& mesh = prob.mesh.parts[part];
  const int n_en = mesh.nodes_per_elem();
  Xe.resize(n_en, mesh.d);
  Ue.resize(n_en, mesh.d);
  for (int a = 0; a < n_en; ++a) {
    const int gn = prob.mesh.node_map[part][mesh.elems(elem, a)];
    Xe.row(a) = prob.mesh.global_nodes.row(gn);
    Ue.row(a) = ufull.segment(mesh.d * gn, mesh.d).transpose();
  }
}

Eigen::VectorXd random_field(int n, unsigned seed, double spread) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-spread, spread);
  Eigen::VectorXd u(n);
  for (int i = 0; i < u.size(); ++i) u[i] = dist(rng);
  return u;
}

}  // namespace

TEST_CASE("affine in-plane state on a flat membrane is in exact equilibrium") {
  SurfaceMesh mesh = mesh_from_patch(flat_patch3(), {3, 3}, 2);
  SurfaceProblem prob;
  MaterialModel mat;
  mat.lambda = 3.0;
  mat.mu = 2.0;
  prob.mesh = couple_meshes({mesh}, {mat});
  Eigen::VectorXd ufull = Eigen::VectorXd::Zero(3 * prob.mesh.n_global());
  Eigen::Matrix2d A;
  A << 0.10, 0.03, -0.02, 0.05;
  for (int n = 0; n < prob.mesh.n_global(); ++n)
    ufull.segment(3 * n, 2) = A * prob.mesh.global_nodes.row(n).head(2).transpose();
  CHECK(residual_error(prob, ufull) < 1e-10);

  Vec xi(2);
  xi << 0.3, -0.4;
  EquilibriumPoint ep = equilibrium_at(prob, ufull, 0, 4, xi);
  CHECK(ep.div_K.norm() < 1e-11);
  CHECK(ep.div_sigma.norm() < 1e-11);
}

TEST_CASE("divergence routes match finite differences of the pointwise stress") {
  auto check_routes = [](const SurfaceProblem& prob, const Eigen::VectorXd& ufull, int part,
                         int elem, const Vec& xi, double s0) {
    const SurfaceMesh& mesh = prob.mesh.parts[part];
    Eigen::MatrixXd Xe, Ue;
    gather(prob, ufull, part, elem, Xe, Ue);
    const MaterialModel& mat = prob.mesh.materials[part];

    EquilibriumPoint ep = equilibrium_at(prob, ufull, part, elem, xi, s0);
    PlainState c = plain_state(mesh.q, mesh.d, mat, s0, xi, mesh.p, Xe, Ue);
    CHECK(std::abs(ep.Lambda - c.Lambda) < 1e-13 * c.Lambda);

    const double h = 1e-6;
    Vec div_K_fd = Vec::Zero(mesh.d);
    Vec div_sig_fd = Vec::Zero(mesh.d);
    for (int k = 0; k < mesh.q; ++k) {
      Vec xp = xi, xm = xi;
      xp[k] += h;
      xm[k] -= h;
      PlainState sp = plain_state(mesh.q, mesh.d, mat, s0, xp, mesh.p, Xe, Ue);
      PlainState sm = plain_state(mesh.q, mesh.d, mat, s0, xm, mesh.p, Xe, Ue);
      div_K_fd += Mat((sp.K - sm.K) / (2 * h)) * c.Q.col(k);
      div_sig_fd += Mat((sp.sigma - sm.sigma) / (2 * h)) * c.q_op.col(k);
    }
    const double scale = std::max(1.0, ep.div_K.norm());
    CHECK((ep.div_K - div_K_fd).norm() < 1e-5 * scale);
    CHECK((ep.div_sigma - div_sig_fd).norm() < 1e-5 * scale);
    // the two routes describe the same equilibrium: Div_Gamma K = Lambda div sigma
    CHECK((ep.div_K - ep.Lambda * ep.div_sigma).norm() < 1e-8 * scale);
  };

  {
    SurfaceMesh mesh = mesh_from_patch(sag_rope_patch(), {4}, 3);
    SurfaceProblem prob;
    prob.mesh = couple_meshes({mesh}, {MaterialModel::rope(10000.0, 0.01)});
    Eigen::VectorXd ufull = random_field(2 * prob.mesh.n_global(), 5, 0.05);
    Vec xi(1);
    xi << 0.37;
    check_routes(prob, ufull, 0, 1, xi, 7.0);
    xi << -0.61;
    check_routes(prob, ufull, 0, 3, xi, 0.0);
  }
  {
    SurfaceMesh mesh = mesh_from_patch(sphere_patch(0.3, 1.5, 0.2, 1.1), {3, 3}, 3);
    SurfaceProblem prob;
    MaterialModel mat;
    mat.lambda = 3.0;
    mat.mu = 2.0;
    prob.mesh = couple_meshes({mesh}, {mat});
    Eigen::VectorXd ufull = random_field(3 * prob.mesh.n_global(), 9, 0.04);
    Vec xi(2);
    xi << 0.21, -0.55;
    check_routes(prob, ufull, 0, 4, xi, 0.0);
    xi << -0.8, 0.35;
    check_routes(prob, ufull, 0, 7, xi, 2.0);
  }
}

TEST_CASE("route identity holds at quadrature points of a curved membrane") {
  SurfaceMesh mesh = mesh_from_patch(sphere_patch(0.3, 1.5, 0.2, 1.1), {4, 4}, 2);
  SurfaceProblem prob;
  MaterialModel mat;
  mat.lambda = 3.0;
  mat.mu = 2.0;
  prob.mesh = couple_meshes({mesh}, {mat});
  Eigen::VectorXd ufull = random_field(3 * prob.mesh.n_global(), 21, 0.05);
  QuadRule rule = gauss_rule(2, 4);
  for (int e = 0; e < mesh.n_elems(); e += 3)
    for (int gp = 0; gp < rule.points.rows(); ++gp) {
      EquilibriumPoint ep =
          equilibrium_at(prob, ufull, 0, e, rule.points.row(gp).transpose());
      CHECK((ep.div_K - ep.Lambda * ep.div_sigma).norm() <
            1e-8 * std::max(1.0, ep.div_K.norm()));
    }
}

TEST_CASE("constant membrane stress on a sphere diverges along the inward normal") {
  // uniform inflation u = alpha X of the unit sphere: sigma = s * p with
  // s = (alpha + alpha^2/2)(2 lambda + 2 mu), and div sigma = -s (2/R') n
  const double alpha = 0.1;
  MaterialModel mat;
  mat.lambda = 3.0;
  mat.mu = 2.0;
  const double beta = alpha + 0.5 * alpha * alpha;
  const double s_exact = beta * (2.0 * mat.lambda + 2.0 * mat.mu);
  const double mag_exact = s_exact * 2.0 / (1.0 + alpha);

  double err_coarse = 0.0, err_fine = 0.0;
  for (int level = 0; level < 2; ++level) {
    const int n = level == 0 ? 4 : 8;
    SurfaceMesh mesh = mesh_from_patch(sphere_patch(0.3, 1.2, 0.25, 1.05), {n, n}, 3);
    SurfaceProblem prob;
    prob.mesh = couple_meshes({mesh}, {mat});
    Eigen::VectorXd ufull(3 * prob.mesh.n_global());
    for (int nn = 0; nn < prob.mesh.n_global(); ++nn)
      ufull.segment(3 * nn, 3) = alpha * prob.mesh.global_nodes.row(nn).transpose();
    double err = 0.0;
    Vec xi(2);
    xi << 0.17, -0.29;
    for (int e = 0; e < mesh.n_elems(); ++e) {
      Eigen::MatrixXd Xe, Ue;
      gather(prob, ufull, 0, e, Xe, Ue);
      EquilibriumPoint ep = equilibrium_at(prob, ufull, 0, e, xi);
      // the deformed outward normal at this point
      ShapeEval sh;
      shape_eval(2, 3, xi, false, sh);
      Eigen::Vector3d X_gp = (Xe.transpose() * sh.N);
      Eigen::Vector3d n_out = X_gp.normalized();
      Eigen::Vector3d want = -mag_exact * n_out;
      err = std::max(err, (Eigen::Vector3d(ep.div_sigma) - want).norm());
    }
    (level == 0 ? err_coarse : err_fine) = err;
  }
  CHECK(err_fine < 2e-3 * mag_exact);
  CHECK(err_coarse / err_fine > 2.5);  // geometric consistency order p-1 = 2
}

TEST_CASE("strong-form residual of the solved sagging rope converges at order p-1") {
  std::vector<double> eps;
  for (int n : {8, 16, 32}) {
    SurfaceMesh mesh = mesh_from_patch(sag_rope_patch(), {n}, 3);
    SurfaceProblem prob;
    prob.mesh = couple_meshes({mesh}, {MaterialModel::rope(10000.0, 0.01)});
    prob.loads.resize(1);
    prob.loads[0].body_force = Vec(2);
    prob.loads[0].body_force << 0.0, -2000.0;
    Vec left(2), right(2);
    left << 0.0, 0.5;
    right << 1.0, 0.0;
    for (const Vec& X : {left, right}) {
      int gn = find_global_node(prob.mesh, X, 1e-8);
      prob.dirichlet.push_back({gn, 0, 0.0});
      prob.dirichlet.push_back({gn, 1, 0.0});
    }
    SurfaceAssembler as(prob);
    NewtonConfig cfg;
    cfg.pretension_schedule = {500.0, 50.0, 5.0, 0.5, 0.0};
    Eigen::VectorXd u = Eigen::VectorXd::Zero(as.n_free());
    NewtonReport rep = newton_solve(as, u, cfg);
    REQUIRE(rep.converged);
    eps.push_back(residual_error(prob, as.full_from_free(u)));
  }
  CHECK(eps[1] < eps[0]);
  CHECK(eps[2] < eps[1]);
  const double slope = std::log2(eps[1] / eps[2]);
  CHECK(slope > 1.4);  // expected p - 1 = 2
}

TEST_CASE("linear elements are rejected for the strong-form residual") {
  SurfaceMesh mesh = mesh_from_patch(flat_patch3(), {2, 2}, 1);
  SurfaceProblem prob;
  MaterialModel mat;
  mat.mu = 1.0;
  prob.mesh = couple_meshes({mesh}, {mat});
  Eigen::VectorXd ufull = Eigen::VectorXd::Zero(3 * prob.mesh.n_global());
  CHECK_THROWS_AS(residual_error(prob, ufull), Error);
  Vec xi = Vec::Zero(2);
  CHECK_THROWS_AS(equilibrium_at(prob, ufull, 0, 0, xi), Error);
}

namespace {

TraceProblem flat_line_problem(int p) {
  TraceProblem prob;
  prob.mesh = background_box(2, vec2(0.0, 0.0), vec2(1.0, 1.0), {5, 4, 1}, p);
  prob.phi = sample_nodes(prob.mesh, [](const Vec& X) { return X[1] - 0.3; });
  prob.material = MaterialModel::rope(10000.0, 0.01);
  return prob;
}

// analytic strong residual of u = (a(X), b(X)) on the line Y = 0.3
Vec flat_line_residual(double mu, double X) {
  const double ap = 0.2 * X, app = 0.2;
  const double bp = 0.6 * X * X, bpp = 1.2 * X;
  const double e = ap + 0.5 * (ap * ap + bp * bp);
  const double ep = app + ap * app + bp * bpp;
  const double Lambda = std::sqrt((1.0 + ap) * (1.0 + ap) + bp * bp);
  Vec r(2);
  r << 2.0 * mu * (app * e + (1.0 + ap) * ep), 2.0 * mu * (bpp * e + bp * ep);
  return Vec(r / Lambda);
}

}  // namespace

TEST_CASE("immersed flat-line state matches the analytic strong residual") {
  TraceProblem prob = flat_line_problem(3);
  TraceAssembler as(prob);
  Eigen::VectorXd u = as.interpolate([](const Vec& X) {
    return vec2(0.1 * X[0] * X[0], 0.2 * X[0] * X[0] * X[0]);
  });

  const int elem = as.mesh().element_id({1, 1, 0});
  const auto& act = as.geometry().active_elems;
  const int ie = static_cast<int>(std::find(act.begin(), act.end(), elem) - act.begin());
  REQUIRE(ie < static_cast<int>(act.size()));
  Vec xi = vec2(0.7, -0.6);  // X = (0.37, 0.3)
  EquilibriumPoint ep = equilibrium_at(as, u, ie, xi);
  const double ap = 0.2 * 0.37, bp = 0.6 * 0.37 * 0.37;
  CHECK(ep.Lambda == doctest::Approx(std::sqrt((1 + ap) * (1 + ap) + bp * bp)).epsilon(1e-12));
  Vec r_exact = flat_line_residual(5000.0, 0.37);
  CHECK((ep.r_strong - r_exact).norm() < 1e-8 * r_exact.norm());
  CHECK((ep.div_K - ep.Lambda * ep.div_sigma).norm() < 1e-12 * ep.div_K.norm());

  // integral oracle: composite Gauss along the line
  QuadRule line = gauss_rule(1, 12);
  double ref = 0.0;
  const int panels = 10;
  for (int c = 0; c < panels; ++c)
    for (int k = 0; k < line.points.rows(); ++k) {
      const double X = (c + 0.5 * (1.0 + line.points(k, 0))) / panels;
      ref += 0.5 * line.weights[k] / panels * flat_line_residual(5000.0, X).squaredNorm();
    }
  CHECK(residual_error(as, u) == doctest::Approx(std::sqrt(ref)).epsilon(1e-6));
}

TEST_CASE("immersed rope strong residual converges at order p-1") {
  auto solve_eps = [](int n, int p) {
    TraceProblem prob;
    prob.mesh = background_box(2, vec2(0.0, -0.05), vec2(1.0, 0.55), {n, n / 2, 1}, p);
    prob.phi = sample_nodes(prob.mesh, [](const Vec& X) {
      return X[1] - (0.5 * (1.0 - X[0]) - std::sin(M_PI * X[0]) / 7.0);
    });
    prob.material = MaterialModel::rope(10000.0, 0.01);
    prob.loads.body_force = vec2(0.0, -2000.0);
    prob.dirichlet = [](const Vec&) { return vec2(0.0, 0.0); };
    TraceAssembler as(prob);
    NewtonConfig cfg;
    cfg.pretension_schedule = {500.0, 50.0, 5.0, 0.5, 0.0};
    Eigen::VectorXd u = Eigen::VectorXd::Zero(as.n_free());
    NewtonReport rep = newton_solve(as, u, cfg);
    REQUIRE(rep.converged);
    return residual_error(as, u);
  };

  std::vector<int> ns = {32, 48, 64};
  std::vector<double> eps;
  for (int n : ns) eps.push_back(solve_eps(n, 2));
  CHECK(eps[1] < eps[0]);
  CHECK(eps[2] < eps[1]);
  const double slope = std::log(eps[0] / eps[2]) / std::log(static_cast<double>(ns[2]) / ns[0]);
  CHECK(slope > 0.7);

  // For p >= 3 the strong residual of the immersed solution stagnates: the
  // frame-degenerate directions of the trace space carry second-derivative
  // noise that the normal-gradient stabilization at rho = 1000/h controls
  // only to an h-independent level (~2e1 here, vs ~1e2 signal at p = 2).
  // Pin the floor so regressions that inflate it are caught.
  CHECK(solve_eps(64, 3) < 35.0);
}

TEST_CASE("linear background elements are rejected for the immersed strong residual") {
  TraceProblem prob = flat_line_problem(1);
  TraceAssembler as(prob);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(as.n_free());
  CHECK_THROWS_AS(residual_error(as, u), Error);
  CHECK_THROWS_AS(equilibrium_at(as, u, 0, Vec::Zero(2)), Error);
}
