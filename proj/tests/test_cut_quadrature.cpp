#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tdcfem/background_mesh.hpp"
#include "tdcfem/cut_quadrature.hpp"
#include "tdcfem/lagrange.hpp"
#include "tdcfem/quadrature.hpp"

using namespace tdcfem;

namespace {

double rope_height(double X) { return 0.5 * (1.0 - X) - std::sin(M_PI * X) / 7.0; }
double rope_height_d(double X) { return -0.5 - M_PI * std::cos(M_PI * X) / 7.0; }

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Vec vec3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

double eval_nodal(const BackgroundMesh& mesh, const Eigen::VectorXd& nodal, int e,
                  const Vec& X) {
  Vec lo, hi;
  mesh.element_box(e, lo, hi);
  Vec xi(mesh.d);
  for (int k = 0; k < mesh.d; ++k)
    xi(k) = 2.0 * (X(k) - lo(k)) / (hi(k) - lo(k)) - 1.0;
  ShapeEval sh;
  shape_eval(mesh.d, mesh.p, xi, false, sh);
  double v = 0.0;
  for (int a = 0; a < mesh.nodes_per_elem(); ++a) v += nodal(mesh.elems(e, a)) * sh.N(a);
  return v;
}

// largest |phi^h| over all emitted points, normalized per element
double worst_point_level(const BackgroundMesh& mesh, const Eigen::VectorXd& nodal,
                         const TraceGeometry& geo) {
  double worst = 0.0;
  for (std::size_t i = 0; i < geo.active_elems.size(); ++i) {
    const int e = geo.active_elems[i];
    double scale = 0.0;
    for (int a = 0; a < mesh.nodes_per_elem(); ++a)
      scale = std::max(scale, std::abs(nodal(mesh.elems(e, a))));
    if (scale == 0.0) scale = 1.0;
    const CutCellQuadrature& cut = geo.cuts[i];
    for (int r = 0; r < cut.points_x.rows(); ++r) {
      const Vec X = cut.points_x.row(r).transpose();
      worst = std::max(worst, std::abs(eval_nodal(mesh, nodal, e, X)) / scale);
    }
  }
  return worst;
}

double circle_measure(int p, int n) {
  const BackgroundMesh mesh =
      background_box(2, vec2(-1.3, -1.3), vec2(1.3, 1.3), {n, n, 1}, p);
  const Eigen::VectorXd phi =
      sample_nodes(mesh, [](const Vec& X) { return X.norm() - 1.0; });
  const TraceGeometry geo = detect_active(mesh, phi, p + 2);
  return geo.measure();
}

double sphere_measure(int p, int n, TraceGeometry* out_geo = nullptr,
                      const BackgroundMesh** out_mesh = nullptr) {
  static BackgroundMesh mesh_keep;
  BackgroundMesh mesh =
      background_box(3, vec3(-1.3, -1.3, -1.3), vec3(1.3, 1.3, 1.3), {n, n, n}, p);
  const Eigen::VectorXd phi =
      sample_nodes(mesh, [](const Vec& X) { return X.norm() - 1.0; });
  TraceGeometry geo = detect_active(mesh, phi, p + 2);
  const double m = geo.measure();
  if (out_geo) *out_geo = std::move(geo);
  if (out_mesh) {
    mesh_keep = std::move(mesh);
    *out_mesh = &mesh_keep;
  }
  return m;
}

}  // namespace

TEST_CASE("background box mesh layout") {
  const BackgroundMesh mesh = background_box(2, vec2(0.0, 0.0), vec2(1.0, 2.0), {2, 3, 1}, 2);
  CHECK(mesh.n_nodes() == 5 * 7);
  CHECK(mesh.n_elems() == 6);
  CHECK(mesh.nodes_per_elem() == 9);
  CHECK(mesh.nodes(0, 0) == doctest::Approx(0.0));
  CHECK(mesh.nodes(1, 0) == doctest::Approx(0.25));  // first axis runs fastest
  CHECK(mesh.nodes(5, 1) == doctest::Approx(2.0 / 6.0));
  Vec lo, hi;
  const int e = mesh.element_id({1, 2, 0});
  mesh.element_box(e, lo, hi);
  CHECK(lo(0) == doctest::Approx(0.5));
  CHECK(hi(0) == doctest::Approx(1.0));
  CHECK(lo(1) == doctest::Approx(4.0 / 3.0));
  CHECK(hi(1) == doctest::Approx(2.0));
  CHECK(mesh.element_index(e)[0] == 1);
  CHECK(mesh.element_index(e)[1] == 2);
  // nodal interpolation of an affine field is exact everywhere
  const Eigen::VectorXd f =
      sample_nodes(mesh, [](const Vec& X) { return 2.0 * X(0) - 0.7 * X(1) + 0.3; });
  CHECK(eval_nodal(mesh, f, e, vec2(0.77, 1.9)) ==
        doctest::Approx(2.0 * 0.77 - 0.7 * 1.9 + 0.3).epsilon(1e-13));
}

TEST_CASE("plane cut of a unit cube element has exact area") {
  const int p = 1;
  const Eigen::MatrixXd ref = reference_nodes(3, p);
  Eigen::VectorXd phi(ref.rows());
  for (int a = 0; a < ref.rows(); ++a) phi(a) = 0.5 * (ref(a, 2) + 1.0) - 0.5;
  const CutCellQuadrature cut =
      cut_element_quadrature(3, p, vec3(0, 0, 0), vec3(1, 1, 1), phi, 3);
  CHECK(cut.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cut.weights.minCoeff() > 0.0);
  for (int r = 0; r < cut.points_x.rows(); ++r) {
    CHECK(std::abs(cut.points_x(r, 2) - 0.5) <= 1e-13);
    // reference and physical coordinates describe the same point
    for (int k = 0; k < 3; ++k)
      CHECK(cut.points_x(r, k) ==
            doctest::Approx(0.5 * (cut.points_ref(r, k) + 1.0)).epsilon(1e-13));
  }
}

TEST_CASE("plane on a mesh plane is claimed by one side") {
  const BackgroundMesh mesh = background_box(3, vec3(0, 0, 0), vec3(1, 1, 1), {4, 4, 4}, 1);
  const Eigen::VectorXd phi = sample_nodes(mesh, [](const Vec& X) { return X(2) - 0.5; });
  const TraceGeometry geo = detect_active(mesh, phi, 2);
  CHECK(geo.active_elems.size() == 16);
  for (int e : geo.active_elems) CHECK(mesh.element_index(e)[2] == 1);
  CHECK(geo.measure() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(geo.active_nodes.size() == 50);  // two full node layers of the 5x5x5 corner lattice
}

TEST_CASE("circle length converges at rate p+1") {
  const double L = 2.0 * M_PI;
  for (int p = 1; p <= 4; ++p) {
    const int n0 = 8;
    const int levels = (p <= 3) ? 3 : 2;
    std::vector<double> err;
    for (int l = 0; l < levels; ++l)
      err.push_back(std::abs(circle_measure(p, n0 << l) - L));
    const double slope = std::log2(err[levels - 2] / err[levels - 1]);
    INFO("p = " << p << " errors " << err[0] << " " << err[levels - 1] << " slope "
                << slope);
    CHECK(slope >= p + 0.7);
  }
}

TEST_CASE("emitted points sit on the discrete level set") {
  const BackgroundMesh mesh =
      background_box(2, vec2(-1.3, -1.3), vec2(1.3, 1.3), {16, 16, 1}, 3);
  const Eigen::VectorXd phi =
      sample_nodes(mesh, [](const Vec& X) { return X.norm() - 1.0; });
  const TraceGeometry geo = detect_active(mesh, phi, 5);
  CHECK(worst_point_level(mesh, phi, geo) <= 1e-12);
}

TEST_CASE("anisotropic elements recover a straight line exactly") {
  const BackgroundMesh mesh = background_box(2, vec2(0.0, 0.0), vec2(2.0, 0.5), {4, 2, 1}, 1);
  const Eigen::VectorXd phi = sample_nodes(mesh, [](const Vec& X) { return X(1) - 0.3; });
  const TraceGeometry geo = detect_active(mesh, phi, 3, nullptr, nullptr, true);
  CHECK(geo.measure() == doctest::Approx(2.0).epsilon(1e-13));
  // endpoints on the domain boundary faces
  std::vector<const CutCellQuadrature::BoundaryPoint*> bps;
  for (const auto& cut : geo.cuts)
    for (const auto& bp : cut.boundary) bps.push_back(&bp);
  REQUIRE(bps.size() == 2);
  std::sort(bps.begin(), bps.end(),
            [](const auto* a, const auto* b) { return a->X(0) < b->X(0); });
  CHECK(bps[0]->X(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bps[0]->X(1) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(bps[0]->outward(0) == doctest::Approx(-1.0));
  CHECK(bps[1]->X(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(bps[1]->outward(0) == doctest::Approx(1.0));
}

TEST_CASE("psi clip keeps the negative side and emits the clip point") {
  const BackgroundMesh mesh = background_box(2, vec2(0.0, 0.0), vec2(1.0, 1.0), {4, 4, 1}, 1);
  const Eigen::VectorXd phi = sample_nodes(mesh, [](const Vec& X) { return X(1) - 0.25; });
  const Eigen::VectorXd psi = sample_nodes(mesh, [](const Vec& X) { return X(0) - 0.6; });
  const TraceGeometry geo = detect_active(mesh, phi, 3, nullptr, &psi, true);
  CHECK(geo.measure() == doctest::Approx(0.6).epsilon(1e-12));
  std::vector<const CutCellQuadrature::BoundaryPoint*> bps;
  for (const auto& cut : geo.cuts)
    for (const auto& bp : cut.boundary) bps.push_back(&bp);
  REQUIRE(bps.size() == 2);
  std::sort(bps.begin(), bps.end(),
            [](const auto* a, const auto* b) { return a->X(0) < b->X(0); });
  // left box face: kept (psi < 0); right box face: clipped away
  CHECK(bps[0]->X(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bps[0]->outward(0) == doctest::Approx(-1.0));
  // clip boundary point with outward grad psi
  CHECK(bps[1]->X(0) == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(bps[1]->X(1) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(bps[1]->outward(0) == doctest::Approx(1.0));
}

TEST_CASE("psi clip of a plane cut in 3d") {
  // plane z = 0.5 inside the middle element layer, clipped at x = 0.5
  const BackgroundMesh mesh = background_box(3, vec3(0, 0, 0), vec3(1, 1, 1), {3, 3, 3}, 1);
  const Eigen::VectorXd phi = sample_nodes(mesh, [](const Vec& X) { return X(2) - 0.5; });
  const Eigen::VectorXd psi = sample_nodes(mesh, [](const Vec& X) { return X(0) - 0.5; });
  const TraceGeometry geo = detect_active(mesh, phi, 3, nullptr, &psi);
  CHECK(geo.measure() == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("codim-2 straight line") {
  const BackgroundMesh mesh =
      background_box(3, vec3(-0.5, -0.5, -0.5), vec3(0.5, 0.5, 0.5), {3, 3, 3}, 1);
  const Eigen::VectorXd phi1 = sample_nodes(mesh, [](const Vec& X) { return X(2); });
  const Eigen::VectorXd phi2 = sample_nodes(mesh, [](const Vec& X) { return X(1); });
  const TraceGeometry geo = detect_active(mesh, phi1, 3, &phi2, nullptr, true);
  CHECK(geo.active_elems.size() == 3);
  CHECK(geo.measure() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(worst_point_level(mesh, phi1, geo) <= 1e-12);
  CHECK(worst_point_level(mesh, phi2, geo) <= 1e-12);
  std::vector<const CutCellQuadrature::BoundaryPoint*> bps;
  for (const auto& cut : geo.cuts)
    for (const auto& bp : cut.boundary) bps.push_back(&bp);
  REQUIRE(bps.size() == 2);
  for (const auto* bp : bps) {
    CHECK(std::abs(std::abs(bp->X(0)) - 0.5) <= 1e-12);
    CHECK(std::abs(bp->X(1)) <= 1e-12);
    CHECK(std::abs(bp->X(2)) <= 1e-12);
  }
}

TEST_CASE("codim-2 cut with four face crossings is degenerate") {
  const int p = 2;
  const Eigen::MatrixXd ref = reference_nodes(3, p);
  Eigen::VectorXd phi1(ref.rows()), phi2(ref.rows());
  for (int a = 0; a < ref.rows(); ++a) {
    const double y = 0.5 * ref(a, 1), z = 0.5 * ref(a, 2);
    phi1(a) = z;
    phi2(a) = y * y - 0.09;
  }
  try {
    cut_element_quadrature(3, p, vec3(-0.5, -0.5, -0.5), vec3(0.5, 0.5, 0.5), phi1, 3,
                           &phi2);
    FAIL("expected DegenerateCut");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateCut);
  }
}

TEST_CASE("uncut elements raise NoIntersection and EmptyTrace") {
  const Eigen::VectorXd phi = Eigen::VectorXd::Constant(8, 1.0);
  try {
    cut_element_quadrature(3, 1, vec3(0, 0, 0), vec3(1, 1, 1), phi, 2);
    FAIL("expected NoIntersection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoIntersection);
  }
  const BackgroundMesh mesh = background_box(2, vec2(0, 0), vec2(1, 1), {2, 2, 1}, 1);
  const Eigen::VectorXd pos = sample_nodes(mesh, [](const Vec&) { return 1.0; });
  try {
    detect_active(mesh, pos, 2);
    FAIL("expected EmptyTrace");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyTrace);
  }
}

TEST_CASE("rope curve active set matches a sign-scan oracle") {
  const BackgroundMesh mesh =
      background_box(2, vec2(0.0, -0.05), vec2(1.0, 0.55), {320, 160, 1}, 1);
  const Eigen::VectorXd phi =
      sample_nodes(mesh, [](const Vec& X) { return X(1) - rope_height(X(0)); });
  const TraceGeometry geo = detect_active(mesh, phi, 2);
  std::vector<int> oracle;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    Vec lo, hi;
    mesh.element_box(e, lo, hi);
    double mn = 1e30, mx = -1e30;
    for (int i = 0; i <= 10; ++i) {
      for (int j = 0; j <= 10; ++j) {
        const double x = lo(0) + (hi(0) - lo(0)) * i / 10.0;
        const double y = lo(1) + (hi(1) - lo(1)) * j / 10.0;
        const double v = y - rope_height(x);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
    }
    if (mn < 0.0 && mx > 0.0) oracle.push_back(e);
  }
  CHECK(geo.active_elems.size() == oracle.size());
  CHECK(geo.active_elems == oracle);
  CHECK(geo.active_elems.size() >= 320);
}

TEST_CASE("rope curve measure matches the arclength") {
  // composite Gauss arclength of y = height(x)
  Eigen::VectorXd gx, gw;
  gauss_legendre_1d(10, gx, gw);
  double L = 0.0;
  const int panels = 40;
  for (int k = 0; k < panels; ++k) {
    const double a = static_cast<double>(k) / panels, b = static_cast<double>(k + 1) / panels;
    for (int i = 0; i < gx.size(); ++i) {
      const double x = a + (b - a) * 0.5 * (gx(i) + 1.0);
      const double d = rope_height_d(x);
      L += gw(i) * 0.5 * (b - a) * std::sqrt(1.0 + d * d);
    }
  }
  const int p = 4;
  const BackgroundMesh mesh =
      background_box(2, vec2(0.0, -0.05), vec2(1.0, 0.55), {96, 48, 1}, p);
  const Eigen::VectorXd phi =
      sample_nodes(mesh, [](const Vec& X) { return X(1) - rope_height(X(0)); });
  const TraceGeometry geo = detect_active(mesh, phi, p + 2);
  CHECK(std::abs(geo.measure() - L) <= 1e-9 * L);
  CHECK(worst_point_level(mesh, phi, geo) <= 1e-12);
}

TEST_CASE("sphere measure converges and the active set is a closed shell") {
  const double A = 4.0 * M_PI;
  const double e6 = std::abs(sphere_measure(2, 6) - A);
  TraceGeometry geo;
  const BackgroundMesh* mesh = nullptr;
  const double e12 = std::abs(sphere_measure(2, 12, &geo, &mesh) - A);
  INFO("errors " << e6 << " " << e12);
  CHECK(std::log2(e6 / e12) >= 2.5);
  CHECK(geo.active_elems.size() >= 100);
  for (int e : geo.active_elems) {
    const std::array<int, 3> idx = mesh->element_index(e);
    int neighbors = 0;
    for (int k = 0; k < 3; ++k) {
      for (int s = -1; s <= 1; s += 2) {
        std::array<int, 3> nb = idx;
        nb[k] += s;
        if (nb[k] < 0 || nb[k] >= mesh->cells[k]) continue;
        if (geo.elem_active[mesh->element_id(nb)]) ++neighbors;
      }
    }
    CHECK(neighbors >= 1);
  }
}
