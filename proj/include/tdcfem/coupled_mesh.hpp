#pragma once

#include <vector>

#include "tdcfem/mechanics.hpp"
#include "tdcfem/surface_mesh.hpp"

namespace tdcfem {

// Several meshes (ropes and membranes) sharing one global node set. Nodes of
// different parts that coincide within 1e-10 of the bounding-box diagonal are
// merged so parts couple through shared ambient displacement dofs. Duplicate
// nodes inside a single part (seams, collapsed poles) merge the same way.
struct CoupledMesh {
  std::vector<SurfaceMesh> parts;
  std::vector<MaterialModel> materials;
  Eigen::MatrixXd global_nodes;            // n_global x d
  std::vector<std::vector<int>> node_map;  // per part: local node -> global node
  int d = 0;

  int n_global() const { return static_cast<int>(global_nodes.rows()); }
  int n_parts() const { return static_cast<int>(parts.size()); }
};

// declared_interfaces: physical points where parts are required to share a
// node; a declared point without at least two merged partners raises
// DanglingInterface.
CoupledMesh couple_meshes(std::vector<SurfaceMesh> parts, std::vector<MaterialModel> materials,
                          const std::vector<Vec>& declared_interfaces = {});

// Global node index closest to X within tol; -1 if none.
int find_global_node(const CoupledMesh& mesh, const Vec& X, double tol);

}  // namespace tdcfem
