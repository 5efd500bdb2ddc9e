#include "mmpc/riccati.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

namespace mmpc {

namespace {

bool symmetric(const Eigen::MatrixXd& m, double tol) {
  return m.rows() == m.cols() &&
         (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

void MpcProblem::validate() const {
  const int ns = state_dim();
  const int nu = input_dim();
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(tau > 0)) throw ConfigError("tau must be positive");
  if (kappa < 0) throw ConfigError("kappa must be nonnegative");
  if (Q.rows() != ns || Q.cols() != ns) throw ConfigError("Q dimension mismatch");
  if (R.rows() != nu || R.cols() != nu) throw ConfigError("R dimension mismatch");
  if (!symmetric(Q, 1e-10) || !symmetric(R, 1e-10)) {
    throw ConfigError("Q and R must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> q_eig(Q);
  if (q_eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, Q.norm())) {
    throw ConfigError("Q must be positive semidefinite");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> r_eig(R);
  if (r_eig.eigenvalues().minCoeff() <= 0) {
    throw ConfigError("R must be positive definite");
  }
  if (static_cast<int>(reference.size()) != horizon + 1) {
    throw ConfigError("reference window must hold horizon+1 poses");
  }
  for (const auto& r : reference) {
    if (r.size() != ns || !r.allFinite()) {
      throw ConfigError("reference poses must be finite state-sized vectors");
    }
  }
  if (injection.rows() != ns) throw ConfigError("injection row count mismatch");
  if (sigma.rows() != injection.cols() || sigma.cols() != injection.cols()) {
    throw ConfigError("sigma must be square and match the injection width");
  }
  if (!symmetric(sigma, 1e-10)) throw ConfigError("sigma must be symmetric");
}

RiccatiSolution solve_dare(const MpcProblem& problem,
                           const Eigen::VectorXd& theta_bar,
                           const Eigen::VectorXd& theta0) {
  const int ns = problem.state_dim();
  const int nu = problem.input_dim();
  const int h = problem.horizon;
  const Eigen::MatrixXd& b = problem.input_matrix;
  if (static_cast<int>(problem.reference.size()) != h + 1) {
    throw ConfigError("reference window must hold horizon+1 poses");
  }
  if (theta_bar.size() != theta0.size()) {
    throw ConfigError("theta_bar and theta0 must have equal sizes");
  }

  RiccatiSolution sol;
  sol.P.resize(h + 1);
  sol.p.resize(h + 1);
  sol.c.resize(h + 1);
  sol.M.resize(h);
  sol.P[h] = 0.5 * (problem.Q + problem.Q.transpose());
  sol.p[h] = Eigen::VectorXd::Zero(ns);
  sol.c[h] = problem.kappa * (theta_bar - theta0).squaredNorm();

  Eigen::MatrixXd s(nu, nu), w(ns, ns), pw(ns, ns), pk(ns, ns);
  Eigen::MatrixXd bt_pn(nu, ns);
  Eigen::VectorXd pn_dr(ns), half(ns);
  for (int k = h - 1; k >= 0; --k) {
    const Eigen::MatrixXd& pn = sol.P[k + 1];
    const Eigen::VectorXd& lin_n = sol.p[k + 1];
    const Eigen::VectorXd dr = problem.reference[k] - problem.reference[k + 1];

    bt_pn.noalias() = b.transpose() * pn;
    s.noalias() = bt_pn * b;
    s += problem.R;
    s = 0.5 * (s + s.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("R + B'PB not positive definite at step " +
                           std::to_string(k));
    }
    sol.M[k] = llt.solve(b.transpose());
    w.noalias() = b * sol.M[k];
    w = 0.5 * (w + w.transpose());
    pw.noalias() = pn * w;

    pk.noalias() = -pw * pn;
    pk += problem.Q + pn;
    sol.P[k] = 0.5 * (pk + pk.transpose());

    pn_dr.noalias() = pn * dr;
    sol.p[k] = lin_n + pn_dr;
    sol.p[k].noalias() -= pw * pn_dr;
    sol.p[k].noalias() -= pw * lin_n;

    half = pn_dr + lin_n;  // P(k+1)(r(k)-r(k+1)) + p(k+1)
    const double trace_term =
        (problem.sigma.array() *
         (problem.injection.transpose() * pn * problem.injection).array())
            .sum();
    sol.c[k] = sol.c[k + 1] + dr.dot(pn_dr) + trace_term -
               half.dot(w * half) + 2.0 * dr.dot(lin_n);

    if (!sol.P[k].allFinite() || !sol.p[k].allFinite() ||
        !std::isfinite(sol.c[k])) {
      throw NumericalError("non-finite Riccati iterate at step " +
                           std::to_string(k));
    }
  }
  return sol;
}

Eigen::VectorXd extract_control(const RiccatiSolution& solution,
                                const Eigen::VectorXd& error, int k,
                                const MpcProblem& problem) {
  if (k < 0 || k >= solution.horizon()) {
    throw ConfigError("control step " + std::to_string(k) +
                      " outside horizon " + std::to_string(solution.horizon()));
  }
  const Eigen::VectorXd dr = problem.reference[k] - problem.reference[k + 1];
  return -solution.M[k] *
         (solution.P[k + 1] * (error + dr) + solution.p[k + 1]);
}

double cost_to_go(const RiccatiSolution& solution, const Eigen::VectorXd& error0) {
  return error0.dot(solution.P[0] * error0) + 2.0 * error0.dot(solution.p[0]) +
         solution.c[0];
}

}  // namespace mmpc
