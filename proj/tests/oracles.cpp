#include "oracles.hpp"

#include <cmath>
#include <random>

namespace mmpc::test {

namespace {

Eigen::Matrix4d rot_z(double t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 0) = std::cos(t);
  m(0, 1) = -std::sin(t);
  m(1, 0) = std::sin(t);
  m(1, 1) = std::cos(t);
  return m;
}

Eigen::Matrix4d rot_x(double t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(1, 1) = std::cos(t);
  m(1, 2) = -std::sin(t);
  m(2, 1) = std::sin(t);
  m(2, 2) = std::cos(t);
  return m;
}

Eigen::Matrix4d trans_z(double d) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(2, 3) = d;
  return m;
}

Eigen::Matrix4d trans_x(double a) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 3) = a;
  return m;
}

}  // namespace

Vector6d oracle_forward_kinematics(const DhChain& chain,
                                   const Eigen::VectorXd& theta) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int i = 0; i < chain.dof(); ++i) {
    const DhRow& row = chain.rows()[i];
    t = t * rot_z(theta[i] + row.theta_offset) * trans_z(row.d) *
        trans_x(row.a) * rot_x(row.alpha);
  }
  Vector6d pose;
  pose.head<3>() = t.block<3, 1>(0, 3);
  const Eigen::Matrix3d r = t.block<3, 3>(0, 0);
  pose[3] = std::atan2(r(2, 1), r(2, 2));
  pose[4] = std::atan2(-r(2, 0), std::hypot(r(2, 1), r(2, 2)));
  pose[5] = std::atan2(r(1, 0), r(0, 0));
  return pose;
}

Eigen::MatrixXd finite_difference_jacobian(const DhChain& chain,
                                           const Eigen::VectorXd& theta,
                                           double step) {
  Eigen::MatrixXd j(6, chain.dof());
  for (int i = 0; i < chain.dof(); ++i) {
    Eigen::VectorXd plus = theta, minus = theta;
    plus[i] += step;
    minus[i] -= step;
    j.col(i) =
        (forward_kinematics(chain, plus) - forward_kinematics(chain, minus)) /
        (2.0 * step);
  }
  return j;
}

BatchSolution batch_tracking_qp(const MpcProblem& problem,
                                const Eigen::VectorXd& error0) {
  const int ns = problem.state_dim();
  const int nu = problem.input_dim();
  const int h = problem.horizon;
  const Eigen::MatrixXd& b = problem.input_matrix;

  // e(k) = error0 + sum_{j<k} (B u(j) + dr(j)); stack u into one vector and
  // minimize sum_k e(k)' Q e(k) + u' blkdiag(R) u by the normal equations.
  std::vector<Eigen::VectorXd> offsets(h + 1);
  offsets[0] = error0;
  for (int k = 1; k <= h; ++k) {
    offsets[k] =
        offsets[k - 1] + (problem.reference[k - 1] - problem.reference[k]);
  }

  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(nu * h, nu * h);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(nu * h);
  for (int k = 0; k < h; ++k) {
    hess.block(k * nu, k * nu, nu, nu) += problem.R;
  }
  // G_k has block B in columns j < k; accumulate G_k' Q G_k and G_k' Q off_k.
  const Eigen::MatrixXd qb = problem.Q * b;
  const Eigen::MatrixXd btqb = b.transpose() * qb;
  for (int k = 1; k <= h; ++k) {
    for (int j = 0; j < k; ++j) {
      grad.segment(j * nu, nu) += b.transpose() * (problem.Q * offsets[k]);
      for (int l = 0; l < k; ++l) {
        hess.block(j * nu, l * nu, nu, nu) += btqb;
      }
    }
  }

  BatchSolution out;
  out.stacked_controls = Eigen::LDLT<Eigen::MatrixXd>(hess).solve(-grad);
  double cost = 0;
  for (int k = 0; k <= h; ++k) {
    Eigen::VectorXd e = offsets[k];
    for (int j = 0; j < std::min(k, h); ++j) {
      e += b * out.stacked_controls.segment(j * nu, nu);
    }
    cost += e.dot(problem.Q * e);
  }
  for (int k = 0; k < h; ++k) {
    const Eigen::VectorXd u = out.stacked_controls.segment(k * nu, nu);
    cost += u.dot(problem.R * u);
  }
  out.cost = cost;
  return out;
}

Eigen::VectorXd rollout_controls(const MpcProblem& problem,
                                 const RiccatiSolution& solution,
                                 const Eigen::VectorXd& error0) {
  const int nu = problem.input_dim();
  const int h = problem.horizon;
  Eigen::VectorXd stacked(nu * h);
  Eigen::VectorXd e = error0;
  for (int k = 0; k < h; ++k) {
    const Eigen::VectorXd u = extract_control(solution, e, k, problem);
    stacked.segment(k * nu, nu) = u;
    e += problem.input_matrix * u +
         (problem.reference[k] - problem.reference[k + 1]);
  }
  return stacked;
}

MonteCarloCost monte_carlo_policy_cost(const MpcProblem& problem,
                                       const RiccatiSolution& solution,
                                       const Eigen::VectorXd& error0,
                                       double kappa_term, std::uint64_t samples,
                                       std::uint64_t seed) {
  const int h = problem.horizon;
  const int nw = static_cast<int>(problem.sigma.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(problem.sigma);
  const Eigen::MatrixXd sqrt_sigma =
      eig.eigenvectors() *
      eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      eig.eigenvectors().transpose();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double sum = 0, sum_sq = 0;
  Eigen::VectorXd e(error0.size()), w(nw);
  for (std::uint64_t s = 0; s < samples; ++s) {
    e = error0;
    double cost = e.dot(problem.Q * e) + kappa_term;
    for (int k = 0; k < h; ++k) {
      const Eigen::VectorXd u = extract_control(solution, e, k, problem);
      cost += u.dot(problem.R * u);
      for (int i = 0; i < nw; ++i) w[i] = gauss(rng);
      e += problem.input_matrix * u +
           (problem.reference[k] - problem.reference[k + 1]) -
           problem.injection * (sqrt_sigma * w);
      cost += e.dot(problem.Q * e);
    }
    sum += cost;
    sum_sq += cost * cost;
  }
  MonteCarloCost out;
  out.samples = samples;
  out.mean = sum / static_cast<double>(samples);
  const double var =
      (sum_sq - sum * sum / static_cast<double>(samples)) /
      (static_cast<double>(samples) - 1.0);
  out.standard_error = std::sqrt(var / static_cast<double>(samples));
  return out;
}

ScalarDare scalar_dare_reference(double b, double q, double r, int horizon,
                                 double sigma2, double kappa_term) {
  ScalarDare out;
  out.P.assign(horizon + 1, 0.0);
  out.p.assign(horizon + 1, 0.0);
  out.c.assign(horizon + 1, 0.0);
  out.P[horizon] = q;
  out.c[horizon] = kappa_term;
  for (int k = horizon - 1; k >= 0; --k) {
    const double pn = out.P[k + 1];
    const double m = b / (r + b * b * pn);
    const double w = b * m;
    out.P[k] = q + pn - pn * w * pn;
    out.p[k] = out.p[k + 1] - pn * w * out.p[k + 1];  // constant reference
    out.c[k] = out.c[k + 1] + sigma2 * pn - out.p[k + 1] * w * out.p[k + 1];
  }
  return out;
}

}  // namespace mmpc::test
