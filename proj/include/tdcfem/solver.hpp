#pragma once

#include <Eigen/Sparse>

#include <string>
#include <vector>

#include "tdcfem/core.hpp"

namespace tdcfem {

// Nonlinear problem interface consumed by the Newton driver. Vectors are in
// free-dof numbering (Dirichlet dofs eliminated by the implementation).
class Assembler {
 public:
  virtual ~Assembler() = default;
  virtual int n_free() const = 0;
  // either output may be null
  virtual void assemble(const Eigen::VectorXd& ufree, Eigen::VectorXd* residual,
                        Eigen::SparseMatrix<double>* tangent) = 0;
  // total potential; only valid when has_potential()
  virtual double potential(const Eigen::VectorXd& ufree) = 0;
  // stored elastic energy of the current state (always available, for logging)
  virtual double strain_energy(const Eigen::VectorXd& ufree) = 0;
  virtual bool has_potential() const = 0;
  virtual bool symmetric_tangent() const = 0;
  virtual void set_load_factor(double factor) = 0;
  virtual void set_pretension(double s0) = 0;
};

struct NewtonConfig {
  double tol_residual = 1e-10;  // absolute infinity-norm, scaled by the initial load magnitude
  int max_iter = 30;
  int load_steps = 1;
  bool line_search = true;
  int max_halvings = 8;
  // descending pretension values solved at full load after the load ramp;
  // end with 0 to finish on the unmodified problem
  std::vector<double> pretension_schedule;
};

struct NewtonReport {
  bool converged = false;
  int total_iters = 0;
  std::vector<double> residual_history;  // infinity norms, all phases concatenated
  std::vector<double> merit_history;     // accepted-step merit values (when available)
  std::vector<int> phase_history;        // phase index per entry of the histories
  std::string log;                       // lines: step iter residual_inf energy
  bool quadratic_tail = false;           // last step satisfied r_new <= r_old^1.5 (or hit tol)
};

// Drives load stepping, the pretension continuation, and damped Newton with
// backtracking on the merit (potential when available, else residual norm).
// Throws NoConvergence with the iteration history in the message; ufree then
// holds the best iterate reached.
NewtonReport newton_solve(Assembler& assembler, Eigen::VectorXd& ufree,
                          const NewtonConfig& config);

// Direct sparse solve with the residual contract |A x - b| <= 1e-12 |b|.
// Cholesky-type factorization for symmetric matrices, LU otherwise.
Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                             bool symmetric);

}  // namespace tdcfem
