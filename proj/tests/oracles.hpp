#ifndef MMPC_TESTS_ORACLES_HPP_
#define MMPC_TESTS_ORACLES_HPP_

#include <cstdint>
#include <vector>

#include "mmpc/kinematics.hpp"
#include "mmpc/riccati.hpp"
#include "mmpc/types.hpp"

// Test-only reference implementations. Each one takes a route independent
// of the library code it checks.
namespace mmpc::test {

/// Forward kinematics by explicit elementary-transform products
/// (Rz * Tz * Tx * Rx per joint), separate from the library's fused
/// DH matrix. Orientation extracted from the rotation matrix columns.
Vector6d oracle_forward_kinematics(const DhChain& chain,
                                   const Eigen::VectorXd& theta);

/// Central finite differences of forward_kinematics.
Eigen::MatrixXd finite_difference_jacobian(const DhChain& chain,
                                           const Eigen::VectorXd& theta,
                                           double step);

struct BatchSolution {
  Eigen::VectorXd stacked_controls;  // u(0..H-1) stacked
  double cost{0};                    // tracking + input cost, no kappa term
};

/// Deterministic finite-horizon tracking solved as one dense least-squares
/// problem over the stacked control vector, via LDLT of the normal
/// equations. Independent of the Riccati recursion.
BatchSolution batch_tracking_qp(const MpcProblem& problem,
                                const Eigen::VectorXd& error0);

/// Open-loop rollout of the recursion's feedback law with no disturbance;
/// returns the stacked control sequence for comparison with the batch QP.
Eigen::VectorXd rollout_controls(const MpcProblem& problem,
                                 const RiccatiSolution& solution,
                                 const Eigen::VectorXd& error0);

struct MonteCarloCost {
  double mean{0};
  double standard_error{0};
  std::uint64_t samples{0};
};

/// Mean realized cost of the feedback policy under sampled disturbances:
/// closed-loop rollouts of e(k+1) = e(k) + B u*(k) + dr(k) - D w(k+1),
/// accumulating the tracking/input/pose cost the problem defines.
MonteCarloCost monte_carlo_policy_cost(const MpcProblem& problem,
                                       const RiccatiSolution& solution,
                                       const Eigen::VectorXd& error0,
                                       double kappa_term, std::uint64_t samples,
                                       std::uint64_t seed);

/// Scalar disturbance-aware recursion iterated with plain doubles.
struct ScalarDare {
  std::vector<double> P;
  std::vector<double> p;
  std::vector<double> c;
};
ScalarDare scalar_dare_reference(double b, double q, double r, int horizon,
                                 double sigma2, double kappa_term);

}  // namespace mmpc::test

#endif  // MMPC_TESTS_ORACLES_HPP_
