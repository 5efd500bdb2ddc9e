#ifndef MMPC_KINEMATICS_HPP_
#define MMPC_KINEMATICS_HPP_

#include <string>
#include <vector>

#include "mmpc/types.hpp"

namespace mmpc {

/// One joint of a standard (distal) Denavit-Hartenberg chain.
/// Link transform: T_i = Rz(theta_i + theta_offset) Tz(d) Tx(a) Rx(alpha).
struct DhRow {
  double a{0};             // link length [m]
  double alpha{0};         // link twist [rad]
  double d{0};             // link offset [m]
  double theta_offset{0};  // joint variable offset [rad]
};

/// Serial revolute chain described by DH rows, base to tip.
///
/// For the reference mobile manipulator the first row is the base-heading
/// pseudo-joint (rotation about the vertical axis at the base origin),
/// followed by the seven arm joints.
class DhChain {
 public:
  explicit DhChain(std::vector<DhRow> rows);

  /// Loads a plain-text table: one row per joint, four decimal fields
  /// (a alpha d theta_offset), '#' comments and blank lines allowed.
  static DhChain from_file(const std::string& path);

  int dof() const { return static_cast<int>(rows_.size()); }
  const std::vector<DhRow>& rows() const { return rows_; }

 private:
  std::vector<DhRow> rows_;
};

/// Per-joint box limits. Entries may be +-infinity for unbounded joints.
struct JointLimits {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static JointLimits unbounded(int dof);
  /// File format: one row per joint, two decimal fields (lower upper).
  static JointLimits from_file(const std::string& path, int expected_dof);

  bool contains(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& theta) const;
};

/// Mobile base pose in the inertial frame. The heading is stored
/// unwrapped so continuity is preserved across full turns.
struct BaseState {
  double x{0};
  double y{0};
  double phi{0};
};

/// Diagnostics for the orientation-rate map used by the Jacobian.
struct JacobianHealth {
  bool near_singular{false};  // Euler-rate map condition above threshold
  double condition{1.0};
};

/// End-effector pose (position + ZYX Euler angles) in the base frame.
Vector6d forward_kinematics(const DhChain& chain, const Eigen::VectorXd& theta);

/// Analytic 6xN pose Jacobian: linear rows from the geometric Jacobian,
/// angular rows mapped to ZYX Euler-angle rates. Near |pitch| = pi/2 the
/// rate map degenerates; this is reported through `health`, not an error.
Eigen::MatrixXd jacobian(const DhChain& chain, const Eigen::VectorXd& theta,
                         JacobianHealth* health = nullptr);

/// One Euler step of the differential-drive base model.
BaseState base_step(const BaseState& state, double v, double eta, double tau);

/// Input matrix B(theta) of the whole-body model, tau included:
/// column 0 = tau * (cos phi, sin phi, 0, 0, 0, 0)^T for the base linear
/// velocity, columns 1..N = tau * J(theta) for the heading rate and the
/// arm joint rates.
Eigen::MatrixXd whole_body_input_matrix(const DhChain& chain,
                                        const Eigen::VectorXd& theta, double tau,
                                        JacobianHealth* health = nullptr);

/// Inertial-frame end-effector pose: the base frame is translated, never
/// rotated, so base x/y add directly to the arm pose. Requires
/// base.phi == theta[0]; heading is stored once and mirrored.
Vector6d whole_body_pose(const DhChain& chain, const BaseState& base,
                         const Eigen::VectorXd& theta);

}  // namespace mmpc

#endif  // MMPC_KINEMATICS_HPP_
