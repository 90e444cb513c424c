#pragma once

// Dense strictly convex QP solver (Goldfarb-Idnani dual active-set method).
//
//   minimize    1/2 z' G z + a' z
//   subject to  E z  = e      (equality rows)
//               C z >= c      (inequality rows)
//
// G must be symmetric positive definite. The solver starts from the
// unconstrained minimizer, which is dual feasible, and adds violated
// constraints one at a time. Primal infeasibility shows up as a step that is
// unbounded in the dual, which is reported as QpStatus::infeasible.

#include <Eigen/Core>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace lipreplan {

struct QpProblem {
  Eigen::MatrixXd hessian;     // n x n
  Eigen::VectorXd linear;      // n
  Eigen::MatrixXd eq_matrix;   // me x n
  Eigen::VectorXd eq_rhs;      // me
  Eigen::MatrixXd ineq_matrix; // mi x n
  Eigen::VectorXd ineq_rhs;    // mi

  QpProblem() = default;
  QpProblem(int n, int me, int mi);
  void resize(int n, int me, int mi);

  int num_variables() const { return static_cast<int>(hessian.rows()); }
  int num_equalities() const { return static_cast<int>(eq_matrix.rows()); }
  int num_inequalities() const { return static_cast<int>(ineq_matrix.rows()); }

  double objective(const Eigen::VectorXd& z) const;
  /// Shape and symmetry checks (symmetry to 1e-12, relative).
  void validate() const;
};

/// Plain-text dump for offline cross-checking. Layout:
///
///   # lipreplan-qp v1
///   n <n> me <me> mi <mi>
///   hessian      (n rows of n values)
///   linear       (1 row of n values)
///   eq_matrix    (me rows) + eq_rhs (1 row)
///   ineq_matrix  (mi rows) + ineq_rhs (1 row)
///
/// Each block is preceded by its name on its own line; values are row-major,
/// space separated, 17 significant digits.
void write_qp_text(std::ostream& os, const QpProblem& problem);
QpProblem read_qp_text(std::istream& is);

enum class QpStatus { optimal, infeasible, iteration_limit };

std::string to_string(QpStatus status);

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Owns a workspace sized for one problem shape. solve() performs no heap
/// allocation when called repeatedly with problems of the shape passed to
/// the constructor (or the last reserve()).
class DualActiveSetSolver {
 public:
  DualActiveSetSolver() = default;
  DualActiveSetSolver(int n, int me, int mi) { reserve(n, me, mi); }

  void reserve(int n, int me, int mi);

  /// Throws NotPositiveDefinite when the Cholesky factorization of the
  /// Hessian fails.
  QpStatus solve(const QpProblem& problem);

  const Eigen::VectorXd& solution() const { return x_; }
  double objective() const { return objective_; }
  int iterations() const { return iterations_; }

  /// Multipliers in the convention  G z + a = E' lambda + C' mu,  mu >= 0.
  /// Valid after an optimal solve; inactive inequalities have mu = 0.
  const Eigen::VectorXd& eq_multipliers() const { return lambda_; }
  const Eigen::VectorXd& ineq_multipliers() const { return mu_; }
  /// Indices of active inequality rows at the optimum.
  std::vector<int> active_inequalities() const;

 private:
  void compute_d(const double* np);
  void update_step();
  void update_r();
  bool add_constraint();
  void delete_constraint(int constraint);
  double ineq_slack(const QpProblem& p, int row) const;

  int n_ = 0, me_ = 0, mi_ = 0;
  Eigen::MatrixXd chol_;  // lower Cholesky factor L of G
  Eigen::MatrixXd J_;     // L^{-T}, then rotated as constraints enter
  Eigen::MatrixXd R_;     // upper triangular factor of the active normals
  Eigen::VectorXd x_, x_old_, step_, d_, np_, r_, u_, u_old_, slack_;
  Eigen::VectorXd lambda_, mu_;
  std::vector<int> active_, active_old_, inactive_;
  std::vector<char> excluded_;
  int iq_ = 0;
  double r_norm_ = 1.0;
  double objective_ = 0.0;
  int iterations_ = 0;
};

}  // namespace lipreplan
