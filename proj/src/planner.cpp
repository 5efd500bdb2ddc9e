#include "mmpc/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mmpc/trajectory.hpp"

namespace mmpc {

namespace {

constexpr int kResampleAttempts = 16;

struct CandidateEval {
  double score{std::numeric_limits<double>::quiet_NaN()};
  bool ok{false};
  bool euler_warning{false};
  RiccatiSolution solution;
  Eigen::VectorXd error0;
  MpcProblem problem;
};

MpcProblem make_problem(const PlanContext& ctx,
                        const std::vector<Vector6d>& window,
                        Eigen::MatrixXd input_matrix) {
  MpcProblem problem;
  problem.Q = ctx.weights.Q;
  problem.R = ctx.weights.R;
  problem.kappa = ctx.weights.kappa;
  problem.horizon = ctx.weights.horizon;
  problem.tau = ctx.weights.tau;
  problem.input_matrix = std::move(input_matrix);
  problem.reference.assign(window.begin(), window.end());
  problem.sigma = ctx.sigma;
  problem.injection = disturbance_injection();
  return problem;
}

CandidateEval evaluate_candidate(const PlanContext& ctx,
                                 const Eigen::VectorXd& theta_bar,
                                 const Eigen::VectorXd& theta0,
                                 const BaseState& base,
                                 const std::vector<Vector6d>& window) {
  CandidateEval eval;
  try {
    JacobianHealth health;
    Eigen::MatrixXd b =
        whole_body_input_matrix(*ctx.chain, theta_bar, ctx.weights.tau, &health);
    eval.euler_warning = health.near_singular;

    Vector6d pose;
    if (ctx.e0_mode == InitialErrorMode::kRecompute) {
      BaseState switched = base;
      switched.phi = theta_bar[0];
      pose = whole_body_pose(*ctx.chain, switched, theta_bar);
    } else {
      pose = whole_body_pose(*ctx.chain, base, theta0);
    }
    eval.error0 = pose - window.front();

    eval.problem = make_problem(ctx, window, std::move(b));
    eval.solution = solve_dare(eval.problem, theta_bar, theta0);
    eval.score = cost_to_go(eval.solution, eval.error0);
    eval.ok = std::isfinite(eval.score);
  } catch (const NumericalError&) {
    eval.ok = false;  // failed candidates drop out of scoring
  }
  return eval;
}

}  // namespace

std::vector<Eigen::VectorXd> sample_candidates(const CandidatePolicy& policy,
                                               const Eigen::VectorXd& theta0,
                                               const JointLimits& limits,
                                               bool* degenerate) {
  if (policy.count < 1) throw ConfigError("candidate count must be >= 1");
  if (!(policy.perturb_radius > 0)) {
    throw ConfigError("perturbation radius must be positive");
  }
  if (!limits.contains(theta0)) {
    throw ConfigError("theta0 violates joint limits");
  }
  if (degenerate != nullptr) *degenerate = false;

  const int dof = static_cast<int>(theta0.size());
  std::vector<int> pool;
  for (int i = policy.perturb_heading ? 0 : 1; i < dof; ++i) pool.push_back(i);
  if (pool.empty()) throw ConfigError("no perturbable joints");
  const int max_subset =
      policy.max_joints_perturbed > 0
          ? std::min<int>(policy.max_joints_perturbed, pool.size())
          : static_cast<int>(pool.size());

  std::mt19937_64 rng(policy.seed);
  std::uniform_int_distribution<int> subset_size(1, max_subset);
  std::uniform_real_distribution<double> delta(-policy.perturb_radius,
                                               policy.perturb_radius);

  std::vector<Eigen::VectorXd> candidates;
  candidates.reserve(policy.count);
  candidates.push_back(theta0);
  std::vector<int> indices = pool;
  for (int c = 1; c < policy.count; ++c) {
    Eigen::VectorXd candidate = theta0;
    for (int attempt = 0; attempt < kResampleAttempts; ++attempt) {
      candidate = theta0;
      const int m = subset_size(rng);
      // partial Fisher-Yates picks m distinct joints
      for (int j = 0; j < m; ++j) {
        std::uniform_int_distribution<int> pick(j, static_cast<int>(indices.size()) - 1);
        std::swap(indices[j], indices[pick(rng)]);
        candidate[indices[j]] += delta(rng);
      }
      if (limits.contains(candidate)) break;
      if (attempt == kResampleAttempts - 1) candidate = limits.clamp(candidate);
    }
    candidates.push_back(std::move(candidate));
  }

  const bool all_home = std::all_of(
      candidates.begin() + 1, candidates.end(),
      [&](const Eigen::VectorXd& c) { return c == theta0; });
  if (policy.count > 1 && all_home) {
    if (degenerate != nullptr) *degenerate = true;
    candidates.resize(1);
  }
  return candidates;
}

Eigen::VectorXd fuse_controls(const Eigen::VectorXd& pose_command,
                              const Eigen::VectorXd& u_star,
                              const ControlLimits& limits, bool* clamped) {
  if (u_star.size() != pose_command.size() + 1) {
    throw ConfigError("fuse_controls expects u_star one entry longer than pose_command");
  }
  if (clamped != nullptr) *clamped = false;
  Eigen::VectorXd fused = u_star;
  fused.tail(pose_command.size()) += pose_command;
  if (limits.max_base_velocity > 0 &&
      std::abs(fused[0]) > limits.max_base_velocity) {
    fused[0] = std::copysign(limits.max_base_velocity, fused[0]);
    if (clamped != nullptr) *clamped = true;
  }
  if (limits.max_joint_rate > 0) {
    for (Eigen::Index i = 1; i < fused.size(); ++i) {
      if (std::abs(fused[i]) > limits.max_joint_rate) {
        fused[i] = std::copysign(limits.max_joint_rate, fused[i]);
        if (clamped != nullptr) *clamped = true;
      }
    }
  }
  return fused;
}

PlanResult plan_step(const PlanContext& ctx, const Eigen::VectorXd& theta0,
                     const BaseState& base, const std::vector<Vector6d>& window,
                     const CandidatePolicy& policy) {
  if (ctx.chain == nullptr) throw ConfigError("plan context has no chain");
  if (static_cast<int>(window.size()) != ctx.weights.horizon + 1) {
    throw ConfigError("reference window must hold horizon+1 poses");
  }

  PlanResult result;
  const auto candidates =
      sample_candidates(policy, theta0, ctx.joint_limits,
                        &result.degenerate_candidates);
  const int n = static_cast<int>(candidates.size());

  std::vector<CandidateEval> evals(n);
  auto body = [&](int i) {
    evals[i] = evaluate_candidate(ctx, candidates[i], theta0, base, window);
  };
  if (ctx.pool != nullptr && n > 1) {
    ctx.pool->parallel_for(n, body);
  } else {
    for (int i = 0; i < n; ++i) body(i);
  }

  result.candidate_costs.resize(n);
  int best = -1;
  for (int i = 0; i < n; ++i) {
    result.candidate_costs[i] = evals[i].score;
    result.euler_map_warning |= evals[i].euler_warning;
    if (evals[i].ok && (best < 0 || evals[i].score < evals[best].score)) {
      best = i;
    }
  }

  const int dof = static_cast<int>(theta0.size());
  if (best < 0) {
    // every candidate failed numerically; hold the pose, command nothing
    result.fallback = true;
    result.chosen = theta0;
    result.chosen_index = 0;
    result.pose_command = Eigen::VectorXd::Zero(dof);
    result.control = Eigen::VectorXd::Zero(dof + 1);
    result.predicted_cost = std::numeric_limits<double>::quiet_NaN();
    return result;
  }

  result.chosen = candidates[best];
  result.chosen_index = best;
  result.predicted_cost = evals[best].score;
  result.pose_command = (result.chosen - theta0) / ctx.weights.tau;

  const Eigen::VectorXd u_star = extract_control(
      evals[best].solution, evals[best].error0, 0, evals[best].problem);
  result.control =
      fuse_controls(result.pose_command, u_star, ctx.control_limits,
                    &result.rate_clamped);
  result.solution = std::move(evals[best].solution);
  result.error0 = std::move(evals[best].error0);
  return result;
}

PlanResult plan_tracking_baseline(const PlanContext& ctx,
                                  const Eigen::VectorXd& theta0,
                                  const BaseState& base,
                                  const std::vector<Vector6d>& window) {
  if (ctx.chain == nullptr) throw ConfigError("plan context has no chain");
  if (static_cast<int>(window.size()) != ctx.weights.horizon + 1) {
    throw ConfigError("reference window must hold horizon+1 poses");
  }
  PlanResult result;
  const int dof = static_cast<int>(theta0.size());
  CandidateEval eval = evaluate_candidate(ctx, theta0, theta0, base, window);
  result.candidate_costs = {eval.score};
  result.euler_map_warning = eval.euler_warning;
  result.chosen = theta0;
  result.chosen_index = 0;
  if (!eval.ok) {
    result.fallback = true;
    result.pose_command = Eigen::VectorXd::Zero(dof);
    result.control = Eigen::VectorXd::Zero(dof + 1);
    result.predicted_cost = std::numeric_limits<double>::quiet_NaN();
    return result;
  }
  result.predicted_cost = eval.score;
  result.pose_command = (result.chosen - theta0) / ctx.weights.tau;

  const Eigen::VectorXd u_star =
      extract_control(eval.solution, eval.error0, 0, eval.problem);
  result.control = fuse_controls(result.pose_command, u_star,
                                 ctx.control_limits, &result.rate_clamped);
  result.solution = std::move(eval.solution);
  result.error0 = std::move(eval.error0);
  return result;
}

}  // namespace mmpc
