#include "lipreplan/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

namespace lipreplan {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

double hypot_safe(double a, double b) {
  const double a1 = std::abs(a);
  const double b1 = std::abs(b);
  if (a1 > b1) {
    const double t = b1 / a1;
    return a1 * std::sqrt(1.0 + t * t);
  }
  if (b1 > a1) {
    const double t = a1 / b1;
    return b1 * std::sqrt(1.0 + t * t);
  }
  return a1 * std::sqrt(2.0);
}

}  // namespace

QpProblem::QpProblem(int n, int me, int mi) { resize(n, me, mi); }

void QpProblem::resize(int n, int me, int mi) {
  hessian.setZero(n, n);
  linear.setZero(n);
  eq_matrix.setZero(me, n);
  eq_rhs.setZero(me);
  ineq_matrix.setZero(mi, n);
  ineq_rhs.setZero(mi);
}

double QpProblem::objective(const Eigen::VectorXd& z) const {
  return 0.5 * z.dot(hessian * z) + linear.dot(z);
}

void QpProblem::validate() const {
  const auto n = hessian.rows();
  if (hessian.cols() != n || linear.size() != n || eq_matrix.cols() != n ||
      ineq_matrix.cols() != n || eq_rhs.size() != eq_matrix.rows() ||
      ineq_rhs.size() != ineq_matrix.rows()) {
    throw std::invalid_argument("QP problem blocks have inconsistent shapes");
  }
  const double scale = std::max(1.0, hessian.cwiseAbs().maxCoeff());
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("QP Hessian is not symmetric");
  }
}

std::string to_string(QpStatus status) {
  switch (status) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

void write_qp_text(std::ostream& os, const QpProblem& p) {
  const auto old_precision = os.precision(17);
  auto block = [&os](const char* name, const auto& m) {
    os << name << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
      os << '\n';
    }
  };
  os << "# lipreplan-qp v1\n";
  os << "n " << p.num_variables() << " me " << p.num_equalities() << " mi "
     << p.num_inequalities() << '\n';
  block("hessian", p.hessian);
  block("linear", p.linear.transpose());
  block("eq_matrix", p.eq_matrix);
  block("eq_rhs", p.eq_rhs.transpose());
  block("ineq_matrix", p.ineq_matrix);
  block("ineq_rhs", p.ineq_rhs.transpose());
  os.precision(old_precision);
}

QpProblem read_qp_text(std::istream& is) {
  std::string token;
  std::getline(is, token);
  if (token != "# lipreplan-qp v1") throw std::runtime_error("not a lipreplan-qp v1 dump");
  int n = 0, me = 0, mi = 0;
  std::string kn, kme, kmi;
  if (!(is >> kn >> n >> kme >> me >> kmi >> mi) || kn != "n" || kme != "me" || kmi != "mi") {
    throw std::runtime_error("malformed QP dump header");
  }
  QpProblem p(n, me, mi);
  auto block = [&is](const char* name, double* m, Eigen::Index rows, Eigen::Index cols) {
    std::string label;
    if (!(is >> label) || label != name) {
      throw std::runtime_error(std::string("expected block ") + name);
    }
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        if (!(is >> m[i * cols + j])) throw std::runtime_error("truncated QP dump");
  };
  // Row-major storage in the file.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> hr(n, n), eqr(me, n),
      inr(mi, n);
  block("hessian", hr.data(), n, n);
  block("linear", p.linear.data(), 1, n);
  block("eq_matrix", eqr.data(), me, n);
  block("eq_rhs", p.eq_rhs.data(), 1, me);
  block("ineq_matrix", inr.data(), mi, n);
  block("ineq_rhs", p.ineq_rhs.data(), 1, mi);
  p.hessian = hr;
  p.eq_matrix = eqr;
  p.ineq_matrix = inr;
  return p;
}

void DualActiveSetSolver::reserve(int n, int me, int mi) {
  n_ = n;
  me_ = me;
  mi_ = mi;
  chol_.setZero(n, n);
  J_.setZero(n, n);
  R_.setZero(n, n);
  x_.setZero(n);
  x_old_.setZero(n);
  step_.setZero(n);
  d_.setZero(n);
  np_.setZero(n);
  r_.setZero(n + 1);
  u_.setZero(n + 1);
  u_old_.setZero(n + 1);
  slack_.setZero(mi);
  lambda_.setZero(me);
  mu_.setZero(mi);
  active_.assign(n + 1, 0);
  active_old_.assign(n + 1, 0);
  inactive_.assign(mi, 0);
  excluded_.assign(mi, 0);
}

void DualActiveSetSolver::compute_d(const double* np) {
  for (int i = 0; i < n_; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n_; ++j) sum += J_(j, i) * np[j];
    d_[i] = sum;
  }
}

void DualActiveSetSolver::update_step() {
  for (int i = 0; i < n_; ++i) {
    double sum = 0.0;
    for (int j = iq_; j < n_; ++j) sum += J_(i, j) * d_[j];
    step_[i] = sum;
  }
}

void DualActiveSetSolver::update_r() {
  for (int i = iq_ - 1; i >= 0; --i) {
    double sum = 0.0;
    for (int j = i + 1; j < iq_; ++j) sum += R_(i, j) * r_[j];
    r_[i] = (d_[i] - sum) / R_(i, i);
  }
}

bool DualActiveSetSolver::add_constraint() {
  // Givens rotations zero d(j) for j > iq, rotating the matching columns of J.
  for (int j = n_ - 1; j >= iq_ + 1; --j) {
    double cc = d_[j - 1];
    double ss = d_[j];
    const double h = hypot_safe(cc, ss);
    if (h == 0.0) continue;
    d_[j] = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      d_[j - 1] = -h;
    } else {
      d_[j - 1] = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n_; ++k) {
      const double t1 = J_(k, j - 1);
      const double t2 = J_(k, j);
      J_(k, j - 1) = t1 * cc + t2 * ss;
      J_(k, j) = xny * (t1 + J_(k, j - 1)) - t2;
    }
  }
  ++iq_;
  for (int i = 0; i < iq_; ++i) R_(i, iq_ - 1) = d_[i];
  if (std::abs(d_[iq_ - 1]) <= kEps * r_norm_) return false;  // linearly dependent
  r_norm_ = std::max(r_norm_, std::abs(d_[iq_ - 1]));
  return true;
}

void DualActiveSetSolver::delete_constraint(int constraint) {
  int qq = -1;
  for (int i = me_; i < iq_; ++i) {
    if (active_[i] == constraint) {
      qq = i;
      break;
    }
  }
  if (qq < 0) return;

  for (int i = qq; i < iq_ - 1; ++i) {
    active_[i] = active_[i + 1];
    u_[i] = u_[i + 1];
    for (int j = 0; j < n_; ++j) R_(j, i) = R_(j, i + 1);
  }
  active_[iq_ - 1] = active_[iq_];
  u_[iq_ - 1] = u_[iq_];
  active_[iq_] = 0;
  u_[iq_] = 0.0;
  for (int j = 0; j < iq_; ++j) R_(j, iq_ - 1) = 0.0;
  --iq_;
  if (iq_ == 0) return;

  // Restore the triangular shape of R.
  for (int j = qq; j < iq_; ++j) {
    double cc = R_(j, j);
    double ss = R_(j + 1, j);
    const double h = hypot_safe(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    R_(j + 1, j) = 0.0;
    if (cc < 0.0) {
      R_(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      R_(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < iq_; ++k) {
      const double t1 = R_(j, k);
      const double t2 = R_(j + 1, k);
      R_(j, k) = t1 * cc + t2 * ss;
      R_(j + 1, k) = xny * (t1 + R_(j, k)) - t2;
    }
    for (int k = 0; k < n_; ++k) {
      const double t1 = J_(k, j);
      const double t2 = J_(k, j + 1);
      J_(k, j) = t1 * cc + t2 * ss;
      J_(k, j + 1) = xny * (J_(k, j) + t1) - t2;
    }
  }
}

double DualActiveSetSolver::ineq_slack(const QpProblem& p, int row) const {
  double sum = -p.ineq_rhs[row];
  for (int j = 0; j < n_; ++j) sum += p.ineq_matrix(row, j) * x_[j];
  return sum;
}

std::vector<int> DualActiveSetSolver::active_inequalities() const {
  std::vector<int> rows;
  for (int i = 0; i < mi_; ++i)
    if (mu_[i] != 0.0) rows.push_back(i);
  return rows;
}

QpStatus DualActiveSetSolver::solve(const QpProblem& p) {
  const int n = p.num_variables();
  const int me = p.num_equalities();
  const int mi = p.num_inequalities();
  if (n != n_ || me != me_ || mi != mi_) reserve(n, me, mi);

  iterations_ = 0;
  lambda_.setZero();
  mu_.setZero();

  // Cholesky G = L L^T, in place in the lower triangle of chol_.
  double trace_g = 0.0;
  for (int i = 0; i < n; ++i) {
    trace_g += p.hessian(i, i);
    for (int j = 0; j <= i; ++j) {
      double sum = p.hessian(i, j);
      for (int k = 0; k < j; ++k) sum -= chol_(i, k) * chol_(j, k);
      if (i == j) {
        if (!(sum > 0.0)) throw NotPositiveDefinite("QP Hessian is not positive definite");
        chol_(i, i) = std::sqrt(sum);
      } else {
        chol_(i, j) = sum / chol_(j, j);
      }
    }
  }

  // J = L^{-T}: column i of L^{-1} becomes row i of J.
  double trace_j = 0.0;
  J_.setZero();
  for (int i = 0; i < n; ++i) {
    for (int k = i; k < n; ++k) {
      double sum = k == i ? 1.0 : 0.0;
      for (int m = i; m < k; ++m) sum -= chol_(k, m) * J_(i, m);
      J_(i, k) = sum / chol_(k, k);
    }
    trace_j += J_(i, i);
  }

  // Unconstrained minimizer x = -G^{-1} a.
  for (int i = 0; i < n; ++i) {
    double sum = -p.linear[i];
    for (int k = 0; k < i; ++k) sum -= chol_(i, k) * step_[k];
    step_[i] = sum / chol_(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double sum = step_[i];
    for (int k = i + 1; k < n; ++k) sum -= chol_(k, i) * x_[k];
    x_[i] = sum / chol_(i, i);
  }
  double f = 0.5 * p.linear.dot(x_);

  R_.setZero();
  r_norm_ = 1.0;
  iq_ = 0;
  u_.setZero();
  r_.setZero();

  // Equalities enter first, with full steps.
  for (int i = 0; i < me; ++i) {
    for (int j = 0; j < n; ++j) np_[j] = p.eq_matrix(i, j);
    compute_d(np_.data());
    update_step();
    update_r();
    double t2 = 0.0;
    const double step_np = step_.dot(np_);
    if (step_.squaredNorm() > kEps) t2 = (p.eq_rhs[i] - np_.dot(x_)) / step_np;
    x_ += t2 * step_;
    u_[iq_] = t2;
    for (int k = 0; k < iq_; ++k) u_[k] -= t2 * r_[k];
    f += 0.5 * t2 * t2 * step_np;
    active_[iq_] = -i - 1;
    if (!add_constraint()) {
      // Dependent equality rows: treated as an empty feasible set.
      objective_ = kInf;
      return QpStatus::infeasible;
    }
  }

  for (int i = 0; i < mi; ++i) {
    inactive_[i] = i;
    excluded_[i] = 0;
  }

  const int max_iterations = 50 * (n + me + mi) + 50;
  const double psi_tol = mi * kEps * trace_g * trace_j * 100.0;

  for (;;) {  // step 1: optimality test
    for (int i = me; i < iq_; ++i) inactive_[active_[i]] = -1;

    double psi = 0.0;
    for (int i = 0; i < mi; ++i) {
      excluded_[i] = 0;
      slack_[i] = ineq_slack(p, i);
      psi += std::min(0.0, slack_[i]);
    }
    if (std::abs(psi) <= psi_tol) break;

    for (int i = 0; i < iq_; ++i) {
      u_old_[i] = u_[i];
      active_old_[i] = active_[i];
    }
    x_old_ = x_;

    bool restart = false;  // back to step 1 after a full step
    bool done = false;
    while (!restart && !done) {  // step 2: pick the most violated constraint
      double ss = 0.0;
      int ip = 0;
      for (int i = 0; i < mi; ++i) {
        if (slack_[i] < ss && inactive_[i] != -1 && !excluded_[i]) {
          ss = slack_[i];
          ip = i;
        }
      }
      if (ss >= 0.0) {
        done = true;
        break;
      }
      for (int j = 0; j < n; ++j) np_[j] = p.ineq_matrix(ip, j);
      u_[iq_] = 0.0;
      active_[iq_] = ip;

      for (;;) {  // step 2a: direction and step length
        if (++iterations_ > max_iterations) {
          objective_ = kInf;
          return QpStatus::iteration_limit;
        }
        compute_d(np_.data());
        update_step();
        update_r();

        double t1 = kInf;
        int leaving = 0;
        for (int k = me; k < iq_; ++k) {
          if (r_[k] > 0.0 && u_[k] / r_[k] < t1) {
            t1 = u_[k] / r_[k];
            leaving = active_[k];
          }
        }
        const double step_np = step_.dot(np_);
        const double t2 = step_.squaredNorm() > kEps ? -slack_[ip] / step_np : kInf;
        const double t = std::min(t1, t2);

        if (t >= kInf) {
          objective_ = kInf;
          return QpStatus::infeasible;
        }
        if (t2 >= kInf) {
          // Dual step only: drop the blocking constraint.
          for (int k = 0; k < iq_; ++k) u_[k] -= t * r_[k];
          u_[iq_] += t;
          inactive_[leaving] = leaving;
          delete_constraint(leaving);
          continue;
        }

        x_ += t * step_;
        f += t * step_np * (0.5 * t + u_[iq_]);
        for (int k = 0; k < iq_; ++k) u_[k] -= t * r_[k];
        u_[iq_] += t;

        if (t == t2) {
          if (!add_constraint()) {
            excluded_[ip] = 1;
            delete_constraint(ip);
            for (int i = 0; i < mi; ++i) inactive_[i] = i;
            for (int i = 0; i < iq_; ++i) {
              active_[i] = active_old_[i];
              if (active_[i] >= 0) inactive_[active_[i]] = -1;
              u_[i] = u_old_[i];
            }
            x_ = x_old_;
            break;  // back to step 2 with ip excluded
          }
          inactive_[ip] = -1;
          restart = true;
          break;
        }

        // Partial step: drop the blocking constraint, retry ip.
        inactive_[leaving] = leaving;
        delete_constraint(leaving);
        slack_[ip] = ineq_slack(p, ip);
      }
    }
    if (done) break;
  }

  (void)f;
  objective_ = p.objective(x_);
  for (int k = 0; k < iq_; ++k) {
    if (active_[k] < 0) {
      lambda_[-active_[k] - 1] = u_[k];
    } else {
      mu_[active_[k]] = u_[k];
    }
  }
  return QpStatus::optimal;
}

}  // namespace lipreplan
