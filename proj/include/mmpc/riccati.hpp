#ifndef MMPC_RICCATI_HPP_
#define MMPC_RICCATI_HPP_

#include <vector>

#include "mmpc/types.hpp"

namespace mmpc {

/// One finite-horizon tracking instance with a frozen input matrix.
///
/// Minimizes  E[ sum_{k=0..H} e(k)' Q e(k) ] + sum_{k=0..H-1} u(k)' R u(k)
///            + kappa * |theta_bar - theta0|^2
/// subject to e(k+1) = e(k) + B u(k) + r(k) - r(k+1), where the reference
/// r is the nominal window plus an accumulating zero-mean position
/// disturbance with per-step covariance `sigma` entering through
/// `injection`.
struct MpcProblem {
  Eigen::MatrixXd Q;  // state weight, PSD
  Eigen::MatrixXd R;  // input weight, PD
  double kappa{0};    // pose-change weight
  int horizon{0};
  double tau{0};
  Eigen::MatrixXd input_matrix;            // frozen B, tau included
  std::vector<Eigen::VectorXd> reference;  // horizon+1 nominal poses
  Eigen::MatrixXd sigma;                   // disturbance covariance
  Eigen::MatrixXd injection;               // maps disturbance into the state

  int state_dim() const { return static_cast<int>(input_matrix.rows()); }
  int input_dim() const { return static_cast<int>(input_matrix.cols()); }

  /// Full invariant check (symmetry, definiteness, dimensions).
  /// Throws ConfigError. Intended for API boundaries, not inner loops.
  void validate() const;
};

/// Backward value-function coefficients of the disturbance-aware DARE.
/// The optimal cost-to-go at step k is
///   J*(e, k) = e' P[k] e + 2 e' p[k] + c[k],
/// and M[k] is the gain factor (R + B' P[k+1] B)^{-1} B' for the control
/// at step k.
struct RiccatiSolution {
  std::vector<Eigen::MatrixXd> P;  // size horizon+1, symmetric PSD
  std::vector<Eigen::VectorXd> p;  // size horizon+1
  std::vector<double> c;           // size horizon+1
  std::vector<Eigen::MatrixXd> M;  // size horizon

  int horizon() const { return static_cast<int>(M.size()); }
};

/// Runs the backward recursion from k = horizon down to 0.
///
/// Terminal conditions: P = Q, p = 0, c = kappa |theta_bar - theta0|^2.
/// Each step factorizes R + B' P B (symmetric PD for R > 0) instead of
/// inverting, and re-symmetrizes P to suppress drift. The disturbance
/// covariance contributes only to c; P, p and M are identical for any
/// sigma (certainty equivalence).
RiccatiSolution solve_dare(const MpcProblem& problem,
                           const Eigen::VectorXd& theta_bar,
                           const Eigen::VectorXd& theta0);

/// Affine feedback law u*(k) = -M[k] (P[k+1] (e + r(k) - r(k+1)) + p[k+1]).
Eigen::VectorXd extract_control(const RiccatiSolution& solution,
                                const Eigen::VectorXd& error, int k,
                                const MpcProblem& problem);

/// Expected cost from initial error e0: e0' P[0] e0 + 2 e0' p[0] + c[0].
/// This is the pose-selection score used by the planner.
double cost_to_go(const RiccatiSolution& solution, const Eigen::VectorXd& error0);

}  // namespace mmpc

#endif  // MMPC_RICCATI_HPP_
