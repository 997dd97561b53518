#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "tdcfem/core.hpp"

namespace tdcfem {

// Quadrature for the zero set of a nodal level-set polynomial inside one
// axis-aligned box element.
//
// Codim 1: phi alone; the cut is a curve (d = 2) or a surface (d = 3).
// Codim 2: phi and phi2 together (d = 3 only); the cut is a curve.
//
// Points are reported both in element reference coordinates ([-1,1]^d) and in
// physical coordinates; weights carry the physical measure of the recovered
// zero set, so summing `weights` gives its length/area inside the element.
// Every emitted point y satisfies |phi^h(y)| <= 1e-12 * max|phi_nodal|
// (and likewise for phi2 when present).
struct CutCellQuadrature {
  Eigen::MatrixXd points_ref;  // n x d
  Eigen::MatrixXd points_x;    // n x d
  Eigen::VectorXd weights;     // n

  // Points where the zero set crosses a selected element face or the psi = 0
  // clip boundary. For a curve cut these are its endpoints (weight 1);
  // `outward` is the unit direction pointing out of the kept region (the box
  // face normal, or grad psi for clip boundaries), used to orient conormals.
  struct BoundaryPoint {
    Vec xi = Vec::Zero(3);
    Vec X = Vec::Zero(3);
    double w = 1.0;
    Vec outward = Vec::Zero(3);
  };
  std::vector<BoundaryPoint> boundary;

  int order = 0;  // Gauss points per direction used on reconstruction pieces
};

// Builds the cut-cell rule for one element.
//
//   d        ambient dimension (2 or 3)
//   p        polynomial order of the nodal data (tensor Lagrange, lexicographic)
//   box_lo/hi  physical element bounds
//   phi      (p+1)^d nodal values of the level set
//   order    Gauss points per direction on each reconstruction piece
//   phi2     second level set for codim-2 cuts (d = 3), or null
//   psi      clip level set, keeps the region psi <= 0, or null
//   cut_faces  per element face (-x,+x,-y,+y,-z,+z): emit boundary points
//              where the zero set meets that face (d = 2 faces, and codim-2
//              curve endpoints), or null for none
//
// Throws Error with code:
//   NoIntersection   the zero set does not enter the element
//   DegenerateCut    reconstruction failed after recursive subdivision
//   NonConvergedCut  a point projection failed to reach tolerance
CutCellQuadrature cut_element_quadrature(
    int d, int p, const Vec& box_lo, const Vec& box_hi,
    const Eigen::VectorXd& phi, int order,
    const Eigen::VectorXd* phi2 = nullptr,
    const Eigen::VectorXd* psi = nullptr,
    const std::array<bool, 6>* cut_faces = nullptr);

}  // namespace tdcfem
