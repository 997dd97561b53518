#pragma once

#include <array>
#include <functional>
#include <vector>

#include "tdcfem/core.hpp"
#include "tdcfem/cut_quadrature.hpp"

namespace tdcfem {

// Structured axis-aligned box mesh used as the embedding background for
// level-set geometries. Nodes form the global order-p lattice (first axis
// fastest); element connectivity is lexicographic over the tensor-product
// reference nodes, matching the shape function ordering.
struct BackgroundMesh {
  int d = 0;
  int p = 1;
  Vec lo = Vec::Zero(3), hi = Vec::Zero(3);
  std::array<int, 3> cells{1, 1, 1};
  Eigen::MatrixXd nodes;  // n_nodes x d
  Eigen::MatrixXi elems;  // n_elems x (p+1)^d

  int n_nodes() const { return static_cast<int>(nodes.rows()); }
  int n_elems() const { return static_cast<int>(elems.rows()); }
  int nodes_per_elem() const { return static_cast<int>(elems.cols()); }

  std::array<int, 3> element_index(int e) const;
  int element_id(const std::array<int, 3>& idx) const;
  void element_box(int e, Vec& lo_e, Vec& hi_e) const;
  double h_max() const;
};

BackgroundMesh background_box(int d, const Vec& lo, const Vec& hi,
                              const std::array<int, 3>& cells, int p);

// Nodal interpolant values of a scalar field.
Eigen::VectorXd sample_nodes(const BackgroundMesh& mesh,
                             const std::function<double(const Vec&)>& f);

// Active subdomain of a level-set geometry: the elements whose cut-cell
// reconstruction succeeds, their quadrature rules, and the incident nodes.
struct TraceGeometry {
  std::vector<int> active_elems;          // ids, ascending
  std::vector<CutCellQuadrature> cuts;    // parallel to active_elems
  std::vector<char> elem_active;          // n_elems flags
  std::vector<char> node_active;          // n_nodes flags
  std::vector<int> active_nodes;          // ids, ascending

  double measure() const;  // total recovered zero-set measure
};

// Tries the cut-cell reconstruction on every element; an element is active
// exactly when it yields a non-empty rule. `order` is the Gauss count per
// direction on reconstruction pieces. With `cut_domain_faces`, element faces
// lying on the background box boundary emit boundary points where the zero
// set crosses them (d = 2). Throws EmptyTrace when no element is cut.
TraceGeometry detect_active(const BackgroundMesh& mesh, const Eigen::VectorXd& phi,
                            int order, const Eigen::VectorXd* phi2 = nullptr,
                            const Eigen::VectorXd* psi = nullptr,
                            bool cut_domain_faces = false);

}  // namespace tdcfem
