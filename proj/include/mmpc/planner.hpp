#ifndef MMPC_PLANNER_HPP_
#define MMPC_PLANNER_HPP_

#include <cstdint>
#include <vector>

#include "mmpc/kinematics.hpp"
#include "mmpc/riccati.hpp"
#include "mmpc/thread_pool.hpp"
#include "mmpc/types.hpp"

namespace mmpc {

/// How candidate joint configurations are sampled around theta0.
struct CandidatePolicy {
  int count{12};                 // total candidates, theta0 included
  double perturb_radius{0.1};    // [rad], uniform(-radius, radius)
  int max_joints_perturbed{0};   // 0 = up to all joints
  bool perturb_heading{true};    // include the base-heading pseudo-joint
  std::uint64_t seed{0};
};

/// Initial tracking error used to score a candidate pose.
enum class InitialErrorMode {
  kRecompute,  // e(0) from forward kinematics at the candidate (default)
  kFixed,      // e(0) frozen at the current pose for every candidate
};

/// Optional magnitude clamps applied to the fused command. 0 = unlimited.
struct ControlLimits {
  double max_base_velocity{0};  // [m/s]
  double max_joint_rate{0};     // [rad/s], applies to heading and arm rates
};

/// Tracking weights shared by every candidate evaluation.
struct MpcWeights {
  Eigen::MatrixXd Q;  // 6x6
  Eigen::MatrixXd R;  // (dof+1)x(dof+1)
  double kappa{1.0};
  int horizon{8};
  double tau{0.1};
};

/// Everything that stays fixed across one controller's planning calls.
struct PlanContext {
  const DhChain* chain{nullptr};
  MpcWeights weights;
  Eigen::Matrix3d sigma{Eigen::Matrix3d::Zero()};  // planner-side model
  JointLimits joint_limits;
  InitialErrorMode e0_mode{InitialErrorMode::kRecompute};
  ControlLimits control_limits;
  ThreadPool* pool{nullptr};  // candidate fan-out; null = serial
};

struct PlanResult {
  Eigen::VectorXd chosen;               // selected joint configuration
  Eigen::VectorXd pose_command;         // (chosen - theta0) / tau
  Eigen::VectorXd control;              // fused command [v, rates...]
  double predicted_cost{0};             // cost-to-go of the chosen candidate
  std::vector<double> candidate_costs;  // NaN marks a failed candidate
  int chosen_index{0};                  // 0 is always theta0
  bool degenerate_candidates{false};
  bool fallback{false};        // every candidate failed; zero command
  bool rate_clamped{false};
  bool euler_map_warning{false};
  RiccatiSolution solution;    // chosen candidate's value function
  Eigen::VectorXd error0;      // chosen candidate's initial error
};

/// Samples `policy.count` configurations including theta0 itself.
/// Non-theta0 candidates perturb a uniformly sized random subset of the
/// perturbable joints; limit violations are resampled a bounded number of
/// times, then clamped. Returns the degenerate set {theta0} (flagged via
/// *degenerate) when the limits leave no room to move.
std::vector<Eigen::VectorXd> sample_candidates(const CandidatePolicy& policy,
                                               const Eigen::VectorXd& theta0,
                                               const JointLimits& limits,
                                               bool* degenerate = nullptr);

/// One planning step: sample candidates, score each by solving its
/// disturbance-aware tracking problem, pick the cheapest, and fuse the
/// pose-change command with the first tracking control. Ties keep the
/// lowest candidate index, so theta0 wins any tie it is part of.
/// Candidate evaluations are pure and fan out to ctx.pool when present.
PlanResult plan_step(const PlanContext& ctx, const Eigen::VectorXd& theta0,
                     const BaseState& base, const std::vector<Vector6d>& window,
                     const CandidatePolicy& policy);

/// Dedicated no-pose-optimization path: a single tracking solve at theta0.
/// Produces results identical to plan_step with a count-1 policy.
PlanResult plan_tracking_baseline(const PlanContext& ctx,
                                  const Eigen::VectorXd& theta0,
                                  const BaseState& base,
                                  const std::vector<Vector6d>& window);

/// v passes through; the pose-change rates add to the angular channels.
Eigen::VectorXd fuse_controls(const Eigen::VectorXd& pose_command,
                              const Eigen::VectorXd& u_star,
                              const ControlLimits& limits,
                              bool* clamped = nullptr);

}  // namespace mmpc

#endif  // MMPC_PLANNER_HPP_
