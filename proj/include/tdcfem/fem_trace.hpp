#pragma once

#include <functional>
#include <vector>

#include "tdcfem/background_mesh.hpp"
#include "tdcfem/fem_surface.hpp"
#include "tdcfem/lagrange.hpp"
#include "tdcfem/quadrature.hpp"
#include "tdcfem/solver.hpp"

namespace tdcfem {

// Immersed problem: the structure is the zero set of the nodal level set
// `phi` on a background box mesh, and the displacement lives on the active
// background nodes (equal interpolation order).
//
// Dirichlet data is imposed weakly with a non-symmetric Nitsche formulation
// at the points where the zero set crosses the background box boundary
// (d = 2). With `slip_dir` set, only the component u . v_d is constrained to
// dirichlet(X) . v_d; otherwise all components are clamped.
struct TraceProblem {
  BackgroundMesh mesh;
  Eigen::VectorXd phi;
  Eigen::VectorXd psi;  // optional clip (keep psi <= 0); size 0 = none
  MaterialModel material;
  PartLoads loads;
  std::function<Vec(const Vec&)> dirichlet;  // null = no constrained boundary
  std::function<Vec(const Vec&)> slip_dir;   // unit direction per point; null = full clamp
  double rho = -1.0;  // ghost-gradient stabilization; negative = default 1000 / h
};

// Assembly of the immersed (trace) finite element system:
//   eta int_Gamma grad w : K  -  eta sum_bp w . (K(u) N_b)
//   + eta sum_bp (u - G) . (DK[w] N_b)
//   + rho int_{active elems} (N^e . grad u_i)(N^e . grad w_i)
//   - loads,
// with N^e = grad phi^h / |grad phi^h| the extended normal. The stabilization
// controls the irrelevant normal variation of the extension and makes the
// linearized systems solvable; the Nitsche adjoint term uses the exact
// linearization DK of the stress resultant, so the tangent is the exact
// derivative of the residual.
class TraceAssembler : public Assembler {
 public:
  explicit TraceAssembler(TraceProblem problem);

  int n_free() const override { return static_cast<int>(anode_ids_.size()) * d_; }
  void assemble(const Eigen::VectorXd& ufree, Eigen::VectorXd* residual,
                Eigen::SparseMatrix<double>* tangent) override;
  double potential(const Eigen::VectorXd& ufree) override;
  double strain_energy(const Eigen::VectorXd& ufree) override;
  bool has_potential() const override { return !has_nitsche_; }
  bool symmetric_tangent() const override { return !has_nitsche_; }
  void set_load_factor(double factor) override { load_factor_ = factor; }
  void set_pretension(double s0) override { s0_ = s0; }

  const BackgroundMesh& mesh() const { return prob_.mesh; }
  const TraceGeometry& geometry() const { return geo_; }
  const TraceProblem& problem() const { return prob_; }
  double rho() const { return rho_; }
  // node id -> free block index, -1 for inactive nodes
  const std::vector<int>& node_block() const { return anode_index_; }

  // free vector interpolating a displacement field at the active nodes
  Eigen::VectorXd interpolate(const std::function<Vec(const Vec&)>& u) const;
  EnergyReport energy(const Eigen::VectorXd& ufree) const;
  // rho int (N^e . grad u_i)^2 dOmega, for stabilization property checks
  double stabilization_energy(const Eigen::VectorXd& ufree) const;

 private:
  struct Pass {
    Eigen::VectorXd* r = nullptr;
    std::vector<Eigen::Triplet<double>>* trips = nullptr;
    double* pot = nullptr;
    double* sen = nullptr;
    double* meas = nullptr;
    double* dmeas = nullptr;
    double* stab = nullptr;
  };
  void run(const Eigen::VectorXd& ufree, const Pass& out) const;

  TraceProblem prob_;
  int d_ = 0;
  TraceGeometry geo_;
  std::vector<int> anode_ids_;    // free block -> node id
  std::vector<int> anode_index_;  // node id -> free block or -1
  QuadRule vol_rule_;
  std::vector<ShapeEval> vol_shapes_;
  std::vector<Eigen::MatrixXd> vol_grads_;  // physical gradients, d x n_en
  double rho_ = 0.0;
  bool has_nitsche_ = false;
  double load_factor_ = 1.0;
  double s0_ = 0.0;
};

}  // namespace tdcfem
