#include "tdcfem/coupled_mesh.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace tdcfem {

namespace {

struct CellKey {
  int64_t k[3];
  bool operator==(const CellKey& o) const {
    return k[0] == o.k[0] && k[1] == o.k[1] && k[2] == o.k[2];
  }
};

struct CellHash {
  size_t operator()(const CellKey& c) const {
    uint64_t h = 1469598103934665603ull;
    for (int64_t v : c.k) {
      h ^= static_cast<uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

}  // namespace

CoupledMesh couple_meshes(std::vector<SurfaceMesh> parts, std::vector<MaterialModel> materials,
                          const std::vector<Vec>& declared_interfaces) {
  if (parts.empty()) fail(ErrorCode::InvalidInput, "no mesh parts");
  if (parts.size() != materials.size())
    fail(ErrorCode::InvalidInput, "one material per mesh part required");
  const int d = parts[0].d;
  for (const auto& m : parts)
    if (m.d != d) fail(ErrorCode::InvalidInput, "all parts must share the ambient dimension");

  Eigen::RowVectorXd lo = parts[0].nodes.colwise().minCoeff();
  Eigen::RowVectorXd hi = parts[0].nodes.colwise().maxCoeff();
  for (const auto& m : parts) {
    lo = lo.cwiseMin(m.nodes.colwise().minCoeff());
    hi = hi.cwiseMax(m.nodes.colwise().maxCoeff());
  }
  double diag = (hi - lo).norm();
  const double tol = 1e-10 * (diag > 0 ? diag : 1.0);
  const double cell = tol > 0 ? tol : 1e-10;

  std::unordered_map<CellKey, std::vector<int>, CellHash> grid;
  std::vector<Eigen::RowVectorXd> coords;   // merged node coordinates
  std::vector<int> multiplicity;            // merged local-node count

  auto key_of = [&](const Eigen::RowVectorXd& x, int64_t shift0, int64_t shift1,
                    int64_t shift2) {
    CellKey key{{0, 0, 0}};
    for (int k = 0; k < d; ++k)
      key.k[k] = static_cast<int64_t>(std::floor(x[k] / cell));
    key.k[0] += shift0;
    key.k[1] += shift1;
    if (d > 2) key.k[2] += shift2;
    return key;
  };

  auto find_or_insert = [&](const Eigen::RowVectorXd& x) {
    for (int64_t s0 = -1; s0 <= 1; ++s0)
      for (int64_t s1 = -1; s1 <= 1; ++s1)
        for (int64_t s2 = (d > 2 ? -1 : 0); s2 <= (d > 2 ? 1 : 0); ++s2) {
          auto it = grid.find(key_of(x, s0, s1, s2));
          if (it == grid.end()) continue;
          for (int idx : it->second)
            if ((coords[idx] - x).norm() <= tol) return idx;
        }
    const int idx = static_cast<int>(coords.size());
    coords.push_back(x);
    multiplicity.push_back(0);
    grid[key_of(x, 0, 0, 0)].push_back(idx);
    return idx;
  };

  CoupledMesh out;
  out.d = d;
  out.node_map.resize(parts.size());
  for (size_t pi = 0; pi < parts.size(); ++pi) {
    out.node_map[pi].resize(parts[pi].n_nodes());
    for (int i = 0; i < parts[pi].n_nodes(); ++i) {
      const int g = find_or_insert(parts[pi].nodes.row(i));
      out.node_map[pi][i] = g;
      multiplicity[g] += 1;
    }
  }

  out.global_nodes.resize(coords.size(), d);
  for (size_t i = 0; i < coords.size(); ++i) out.global_nodes.row(i) = coords[i];
  out.parts = std::move(parts);
  out.materials = std::move(materials);

  for (const Vec& X : declared_interfaces) {
    Eigen::RowVectorXd x = X.transpose();
    int found = -1;
    for (int64_t s0 = -1; s0 <= 1 && found < 0; ++s0)
      for (int64_t s1 = -1; s1 <= 1 && found < 0; ++s1)
        for (int64_t s2 = (d > 2 ? -1 : 0); s2 <= (d > 2 ? 1 : 0) && found < 0; ++s2) {
          auto it = grid.find(key_of(x, s0, s1, s2));
          if (it == grid.end()) continue;
          for (int idx : it->second)
            if ((coords[idx] - x).norm() <= tol) {
              found = idx;
              break;
            }
        }
    if (found < 0)
      fail(ErrorCode::DanglingInterface, "declared shared node has no mesh node");
    if (multiplicity[found] < 2)
      fail(ErrorCode::DanglingInterface, "declared shared node has no partner");
  }
  return out;
}

int find_global_node(const CoupledMesh& mesh, const Vec& X, double tol) {
  int best = -1;
  double best_dist = tol;
  for (int i = 0; i < mesh.n_global(); ++i) {
    double dist = (mesh.global_nodes.row(i).transpose() - X).norm();
    if (dist <= best_dist) {
      best = i;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace tdcfem
