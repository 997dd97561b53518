#pragma once

#include <functional>
#include <vector>

#include "tdcfem/coupled_mesh.hpp"
#include "tdcfem/lagrange.hpp"
#include "tdcfem/quadrature.hpp"
#include "tdcfem/solver.hpp"

namespace tdcfem {

struct PartLoads {
  Vec body_force;         // dead load per unit eta and undeformed measure; empty = none
  double pressure = 0.0;  // follower pressure on the deformed surface (q = 2, d = 3 only)
};

struct NodeConstraint {
  int node = 0;  // global node id
  int comp = 0;
  double value = 0.0;
};

struct TractionLoad {
  int part = 0;
  SurfaceMesh::Facet facet;
  std::function<Vec(const Vec&)> traction;  // total dead traction per undeformed boundary measure
};

struct SurfaceProblem {
  CoupledMesh mesh;
  std::vector<PartLoads> loads;  // per part; may be left empty
  std::vector<NodeConstraint> dirichlet;
  std::vector<TractionLoad> tractions;
};

struct EnergyReport {
  double strain_energy = 0.0;       // (1/2) eta int S : E_tang
  double undeformed_measure = 0.0;  // int dGamma over all parts
  double deformed_measure = 0.0;    // int Lambda dGamma
};

// Conforming finite element assembly on coupled surface meshes. Internal
// forces use p+1 Gauss points per direction, energies p+2. Dirichlet
// constraints are eliminated; free vectors exclude them.
class SurfaceAssembler : public Assembler {
 public:
  explicit SurfaceAssembler(SurfaceProblem problem);

  int n_free() const override { return static_cast<int>(free_dofs_.size()); }
  void assemble(const Eigen::VectorXd& ufree, Eigen::VectorXd* residual,
                Eigen::SparseMatrix<double>* tangent) override;
  double potential(const Eigen::VectorXd& ufree) override;
  double strain_energy(const Eigen::VectorXd& ufree) override;
  bool has_potential() const override { return !has_pressure_; }
  bool symmetric_tangent() const override { return !has_pressure_; }
  void set_load_factor(double factor) override { load_factor_ = factor; }
  void set_pretension(double s0) override { s0_ = s0; }

  int n_full() const { return n_full_; }
  Eigen::VectorXd full_from_free(const Eigen::VectorXd& ufree) const;
  Eigen::VectorXd free_from_full(const Eigen::VectorXd& ufull) const;
  EnergyReport energy(const Eigen::VectorXd& ufree) const;
  const SurfaceProblem& problem() const { return prob_; }

 private:
  struct GaussCache {
    QuadRule rule;
    std::vector<ShapeEval> shapes;
  };
  void pass(const Eigen::VectorXd& ufull, bool energy_rule, Eigen::VectorXd* r_full,
            std::vector<Eigen::Triplet<double>>* trips, double* pot, double* sen, double* meas,
            double* dmeas) const;

  SurfaceProblem prob_;
  int n_full_ = 0;
  int d_ = 0;
  std::vector<int> free_index_;  // full dof -> free id or -1
  std::vector<int> free_dofs_;   // free id -> full dof
  Eigen::VectorXd fixed_values_;
  std::vector<GaussCache> acache_, ecache_;
  bool has_pressure_ = false;
  double load_factor_ = 1.0;
  double s0_ = 0.0;
};

}  // namespace tdcfem
