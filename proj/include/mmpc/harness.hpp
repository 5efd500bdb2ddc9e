#ifndef MMPC_HARNESS_HPP_
#define MMPC_HARNESS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmpc/kinematics.hpp"
#include "mmpc/planner.hpp"
#include "mmpc/trajectory.hpp"

namespace mmpc {

/// Controller variants compared by the experiments.
enum class Variant {
  kPoHu,   // pose optimization, disturbance-aware scoring
  kPpoHu,  // pose optimization every periodic_interval steps
  kNpoHu,  // tracking only (dedicated baseline path)
  kPoNhu,  // pose optimization scored with a zero disturbance model
};

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

/// Complete description of one closed-loop Monte Carlo experiment.
struct ExperimentSpec {
  DhChain chain{std::vector<DhRow>{DhRow{}}};
  JointLimits limits{JointLimits::unbounded(1)};

  TrajectoryKind kind{TrajectoryKind::kCurveB};
  std::string trajectory_file;
  int steps{500};

  double disturbance_scale{0.4};        // q
  Eigen::Vector3d sigma_base_diag{0.015 * 0.015, 0.025 * 0.025, 0.015 * 0.015};

  double q_scale{1000.0};
  double r_scale{1.0};
  double kappa{1.0};
  int horizon{8};
  double tau{0.1};

  CandidatePolicy policy;
  InitialErrorMode e0_mode{InitialErrorMode::kRecompute};
  ControlLimits control_limits;
  bool force_planner_sigma_zero{false};  // PO-HU reduction knob for tests

  PredictorMode predictor{PredictorMode::kOracleNominal};
  int history_window{10};

  Variant variant{Variant::kPoHu};
  int periodic_interval{5};

  int trials{20};
  std::uint64_t base_seed{1};

  Eigen::VectorXd theta_start;   // defaults to zeros when empty
  Vector6d start_offset{Vector6d::Zero()};

  Eigen::Matrix3d experiment_sigma() const {
    return disturbance_scale * sigma_base_diag.asDiagonal().toDenseMatrix();
  }
};

struct StepRecord {
  int k{0};
  Vector6d pose;       // s(k+1), after applying the control
  Vector6d reference;  // r(k+1), realized
  Vector6d error;      // pose - reference
  Eigen::VectorXd control;
  Eigen::VectorXd theta_bar;  // chosen pose at this step
  bool pose_switch{false};
  double tracking_cost{0};
  double input_cost{0};
  double pose_cost{0};
  double predicted_cost{0};
  int chosen_index{0};
};

struct TrialRecord {
  std::uint64_t seed{0};
  std::vector<StepRecord> steps;
  double total_cost{0};
  bool failed{false};
  std::string failure{};
  int limit_clip_events{0};
  int pose_switches{0};
  int euler_warnings{0};
  int window_clamp_steps{0};
};

/// One closed-loop run: realize a disturbed reference, plan every step per
/// the variant, drive the nonlinear kinematics with the fused commands,
/// and account the realized cost.
TrialRecord run_trial(const ExperimentSpec& spec, std::uint64_t seed);

/// Replays the trial up to step k and returns that step's full planning
/// result (candidate costs, chosen pose, value-function sequences).
PlanResult replan_at_step(const ExperimentSpec& spec, std::uint64_t seed, int k);

struct AggregateReport {
  int trials_requested{0};
  int trials_completed{0};
  double mean_cost{0};
  double stddev_cost{0};
  std::vector<double> per_trial_cost;        // completed trials only
  std::vector<std::uint64_t> per_trial_seed;
  std::vector<double> mean_accumulated;      // per-step mean running cost
  bool unreliable{false};                    // >10% trial failures
  int failures{0};
};

/// Runs spec.trials seeded trials (base_seed .. base_seed+trials-1),
/// optionally fanning trials out to `pool`. Pure function of the spec.
AggregateReport run_experiment(const ExperimentSpec& spec,
                               ThreadPool* pool = nullptr);

struct TimingRow {
  int candidate_count{0};
  int horizon{0};
  int threads{0};
  int plans{0};
  double median_us{0};
  double mean_us{0};
  double p90_us{0};
};

/// Wall-clock statistics of plan_step over >= `plans` planning calls from a
/// warmed-up representative state, for every combination of the sweeps.
std::vector<TimingRow> benchmark_planning(const ExperimentSpec& spec,
                                          const std::vector<int>& candidate_counts,
                                          const std::vector<int>& horizons,
                                          const std::vector<int>& thread_widths,
                                          int plans);

/// Header metadata stamped into every artifact.
struct ArtifactMeta {
  std::string config_hash;
  std::uint64_t base_seed{0};
};

void write_trial_csv(const std::string& path, const TrialRecord& record,
                     const ArtifactMeta& meta);
void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows,
                      const ArtifactMeta& meta);

}  // namespace mmpc

#endif  // MMPC_HARNESS_HPP_
