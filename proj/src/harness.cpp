#include "mmpc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

namespace mmpc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t candidate_seed(std::uint64_t trial_seed, int step) {
  return splitmix64(trial_seed ^ splitmix64(static_cast<std::uint64_t>(step) + 1));
}

MpcWeights make_weights(const ExperimentSpec& spec) {
  MpcWeights w;
  w.Q = spec.q_scale * Eigen::MatrixXd::Identity(6, 6);
  w.R = spec.r_scale *
        Eigen::MatrixXd::Identity(spec.chain.dof() + 1, spec.chain.dof() + 1);
  w.kappa = spec.kappa;
  w.horizon = spec.horizon;
  w.tau = spec.tau;
  return w;
}

Eigen::VectorXd start_configuration(const ExperimentSpec& spec) {
  if (spec.theta_start.size() == 0) {
    return Eigen::VectorXd::Zero(spec.chain.dof());
  }
  if (spec.theta_start.size() != spec.chain.dof()) {
    throw ConfigError("theta_start size does not match the chain");
  }
  return spec.theta_start;
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kPoHu: return "PO-HU";
    case Variant::kPpoHu: return "pPO-HU";
    case Variant::kNpoHu: return "NPO-HU";
    case Variant::kPoNhu: return "PO-NHU";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  if (name == "PO-HU") return Variant::kPoHu;
  if (name == "pPO-HU") return Variant::kPpoHu;
  if (name == "NPO-HU") return Variant::kNpoHu;
  if (name == "PO-NHU") return Variant::kPoNhu;
  throw ConfigError("unknown variant: " + name);
}

namespace {

TrialRecord run_trial_impl(const ExperimentSpec& spec, std::uint64_t seed,
                           int probe_step, PlanResult* probe_out);

}  // namespace

TrialRecord run_trial(const ExperimentSpec& spec, std::uint64_t seed) {
  return run_trial_impl(spec, seed, -1, nullptr);
}

PlanResult replan_at_step(const ExperimentSpec& spec, std::uint64_t seed, int k) {
  if (k < 0 || k >= spec.steps) {
    throw ConfigError("probe step outside the trajectory");
  }
  PlanResult out;
  const TrialRecord record = run_trial_impl(spec, seed, k, &out);
  if (record.failed && static_cast<int>(record.steps.size()) < k) {
    throw NumericalError("trial failed before step " + std::to_string(k) + ": " +
                         record.failure);
  }
  return out;
}

namespace {

TrialRecord run_trial_impl(const ExperimentSpec& spec, std::uint64_t seed,
                           int probe_step, PlanResult* probe_out) {
  TrialRecord record;
  record.seed = seed;

  Eigen::VectorXd theta = start_configuration(spec);
  if (!spec.limits.contains(theta)) {
    throw ConfigError("start configuration violates joint limits");
  }
  BaseState base{0.0, 0.0, theta[0]};

  // The nominal path starts on the end effector (plus any stress offset).
  const Vector6d anchor =
      whole_body_pose(spec.chain, base, theta) + spec.start_offset;
  std::vector<Vector6d> nominal;
  if (spec.kind == TrajectoryKind::kFile) {
    nominal = load_trajectory(spec.trajectory_file);
    if (static_cast<int>(nominal.size()) != spec.steps + 1) {
      throw ConfigError("trajectory file length does not match steps+1");
    }
  } else {
    nominal = make_nominal(spec.kind, spec.steps, spec.tau, anchor);
  }

  ReferenceModel model;
  model.nominal = nominal;
  model.sigma = spec.experiment_sigma();
  model.seed = seed;
  const DisturbedTrajectory disturbed = realize_disturbance(model);

  PlanContext ctx;
  ctx.chain = &spec.chain;
  ctx.weights = make_weights(spec);
  ctx.sigma = (spec.variant == Variant::kPoNhu || spec.force_planner_sigma_zero)
                  ? Eigen::Matrix3d::Zero()
                  : spec.experiment_sigma();
  ctx.joint_limits = spec.limits;
  ctx.e0_mode = spec.e0_mode;
  ctx.control_limits = spec.control_limits;
  ctx.pool = nullptr;

  const Eigen::MatrixXd cost_r = ctx.weights.R;
  const Eigen::MatrixXd cost_q = ctx.weights.Q;
  const int dof = spec.chain.dof();

  Predictor predictor{spec.predictor, spec.history_window};
  std::vector<Vector6d> history;
  history.push_back(disturbed.realized[0]);

  record.steps.reserve(spec.steps);
  std::vector<Vector6d> window(spec.horizon + 1);
  for (int k = 0; k < spec.steps; ++k) {
    bool clamped = false;
    const std::vector<Vector6d> predicted =
        predict_window(predictor, history, nominal, k, spec.horizon, &clamped);
    if (clamped) ++record.window_clamp_steps;
    // Deltas come from the prediction; the window is re-anchored on the
    // observed current reference so e(0) reflects the realized error.
    for (int i = 0; i <= spec.horizon; ++i) {
      window[i] = disturbed.realized[k] + (predicted[i] - predicted[0]);
    }

    CandidatePolicy policy = spec.policy;
    policy.seed = candidate_seed(seed, k);
    PlanResult plan;
    try {
      switch (spec.variant) {
        case Variant::kNpoHu:
          plan = plan_tracking_baseline(ctx, theta, base, window);
          break;
        case Variant::kPpoHu:
          if (k % spec.periodic_interval != 0) policy.count = 1;
          plan = plan_step(ctx, theta, base, window, policy);
          break;
        default:
          plan = plan_step(ctx, theta, base, window, policy);
          break;
      }
    } catch (const std::exception& e) {
      record.failed = true;
      record.failure = e.what();
      break;
    }
    if (k == probe_step && probe_out != nullptr) {
      *probe_out = plan;
      return record;
    }
    if (plan.fallback) {
      record.failed = true;
      record.failure = "all candidates failed at step " + std::to_string(k);
      break;
    }
    if (plan.euler_map_warning) ++record.euler_warnings;

    const double pose_cost =
        spec.kappa * (plan.chosen - theta).squaredNorm();
    const Eigen::VectorXd& u = plan.control;
    const double input_cost = u.dot(cost_r * u);

    // True plant: nonlinear base + joint integration, heading mirrored.
    base = base_step(base, u[0], u[1], spec.tau);
    theta += spec.tau * u.tail(dof);
    const Eigen::VectorXd clamped_theta = spec.limits.clamp(theta);
    if ((clamped_theta.array() != theta.array()).any()) {
      ++record.limit_clip_events;
      theta = clamped_theta;
    }
    theta[0] = base.phi = clamped_theta[0];

    const Vector6d pose = whole_body_pose(spec.chain, base, theta);
    const Vector6d error = pose - disturbed.realized[k + 1];
    const double tracking_cost = error.dot(cost_q * error);

    StepRecord step;
    step.k = k;
    step.pose = pose;
    step.reference = disturbed.realized[k + 1];
    step.error = error;
    step.control = u;
    step.theta_bar = plan.chosen;
    step.pose_switch = plan.chosen_index != 0;
    step.tracking_cost = tracking_cost;
    step.input_cost = input_cost;
    step.pose_cost = pose_cost;
    step.predicted_cost = plan.predicted_cost;
    step.chosen_index = plan.chosen_index;
    record.steps.push_back(std::move(step));

    record.total_cost += tracking_cost + input_cost + pose_cost;
    if (plan.chosen_index != 0) ++record.pose_switches;
    history.push_back(disturbed.realized[k + 1]);
  }
  return record;
}

}  // namespace

AggregateReport run_experiment(const ExperimentSpec& spec, ThreadPool* pool) {
  if (spec.trials < 1) throw ConfigError("experiment needs at least one trial");
  AggregateReport report;
  report.trials_requested = spec.trials;

  std::vector<TrialRecord> records(spec.trials);
  std::vector<std::string> errors(spec.trials);
  auto body = [&](int i) {
    const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(i);
    try {
      records[i] = run_trial(spec, seed);
    } catch (const std::exception& e) {
      records[i].failed = true;
      records[i].failure = e.what();
      records[i].seed = seed;
    }
  };
  if (pool != nullptr) {
    pool->parallel_for(spec.trials, body);
  } else {
    for (int i = 0; i < spec.trials; ++i) body(i);
  }

  std::vector<double> accum_sum;
  for (const TrialRecord& r : records) {
    if (r.failed) {
      ++report.failures;
      continue;
    }
    report.per_trial_cost.push_back(r.total_cost);
    report.per_trial_seed.push_back(r.seed);
    if (accum_sum.size() < r.steps.size()) accum_sum.resize(r.steps.size(), 0.0);
    double running = 0;
    for (std::size_t k = 0; k < r.steps.size(); ++k) {
      running += r.steps[k].tracking_cost + r.steps[k].input_cost +
                 r.steps[k].pose_cost;
      accum_sum[k] += running;
    }
  }
  report.trials_completed = static_cast<int>(report.per_trial_cost.size());
  report.unreliable = report.failures * 10 > report.trials_requested;
  if (report.trials_completed > 0) {
    const double n = report.trials_completed;
    report.mean_cost =
        std::accumulate(report.per_trial_cost.begin(), report.per_trial_cost.end(), 0.0) / n;
    double var = 0;
    for (double c : report.per_trial_cost) {
      var += (c - report.mean_cost) * (c - report.mean_cost);
    }
    report.stddev_cost = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    report.mean_accumulated.resize(accum_sum.size());
    for (std::size_t k = 0; k < accum_sum.size(); ++k) {
      report.mean_accumulated[k] = accum_sum[k] / n;
    }
  }
  return report;
}

std::vector<TimingRow> benchmark_planning(const ExperimentSpec& spec,
                                          const std::vector<int>& candidate_counts,
                                          const std::vector<int>& horizons,
                                          const std::vector<int>& thread_widths,
                                          int plans) {
  if (plans < 1) throw ConfigError("benchmark needs at least one plan");

  // Warm up: drive a short closed-loop prefix to a representative state,
  // then rebuild the plant state by replaying the recorded controls.
  ExperimentSpec warm = spec;
  warm.variant = Variant::kPoHu;
  warm.steps = std::min(spec.steps, 60);
  const TrialRecord prefix = run_trial(warm, spec.base_seed);
  if (prefix.failed || prefix.steps.empty()) {
    throw NumericalError("benchmark warm-up trial failed: " + prefix.failure);
  }
  Eigen::VectorXd theta = start_configuration(spec);
  BaseState base{0.0, 0.0, theta[0]};
  for (const StepRecord& s : prefix.steps) {
    base = base_step(base, s.control[0], s.control[1], spec.tau);
    theta += spec.tau * s.control.tail(spec.chain.dof());
    theta = spec.limits.clamp(theta);
    base.phi = theta[0];
  }

  // Reference window around the post-prefix step.
  const Vector6d anchor =
      whole_body_pose(spec.chain, BaseState{0, 0, start_configuration(spec)[0]},
                      start_configuration(spec)) +
      spec.start_offset;
  const std::vector<Vector6d> nominal =
      spec.kind == TrajectoryKind::kFile
          ? load_trajectory(spec.trajectory_file)
          : make_nominal(spec.kind, spec.steps, spec.tau, anchor);

  std::vector<TimingRow> rows;
  for (int width : thread_widths) {
    std::optional<ThreadPool> pool;
    if (width > 1) pool.emplace(width);
    for (int horizon : horizons) {
      PlanContext ctx;
      ctx.chain = &spec.chain;
      ExperimentSpec hspec = spec;
      hspec.horizon = horizon;
      ctx.weights = make_weights(hspec);
      ctx.sigma = spec.experiment_sigma();
      ctx.joint_limits = spec.limits;
      ctx.e0_mode = spec.e0_mode;
      ctx.control_limits = spec.control_limits;
      ctx.pool = pool ? &*pool : nullptr;

      std::vector<Vector6d> window(horizon + 1);
      const int k0 = static_cast<int>(prefix.steps.size());
      const int last = static_cast<int>(nominal.size()) - 1;
      for (int i = 0; i <= horizon; ++i) {
        window[i] = nominal[std::min(k0 + i, last)];
      }

      for (int count : candidate_counts) {
        CandidatePolicy policy = spec.policy;
        policy.count = count;
        std::vector<double> times_us;
        times_us.reserve(plans);
        for (int i = 0; i < plans; ++i) {
          policy.seed = candidate_seed(spec.base_seed, i);
          const auto t0 = std::chrono::steady_clock::now();
          const PlanResult plan = plan_step(ctx, theta, base, window, policy);
          const auto t1 = std::chrono::steady_clock::now();
          if (plan.fallback) {
            throw NumericalError("benchmark plan failed");
          }
          times_us.push_back(
              std::chrono::duration<double, std::micro>(t1 - t0).count());
        }
        std::sort(times_us.begin(), times_us.end());
        TimingRow row;
        row.candidate_count = count;
        row.horizon = horizon;
        row.threads = width;
        row.plans = plans;
        row.median_us = times_us[times_us.size() / 2];
        row.mean_us =
            std::accumulate(times_us.begin(), times_us.end(), 0.0) / times_us.size();
        row.p90_us = times_us[static_cast<std::size_t>(times_us.size() * 0.9)];
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_trial_csv(const std::string& path, const TrialRecord& record,
                     const ArtifactMeta& meta) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trial csv: " + path);
  out.precision(17);
  out << "# config_hash=" << meta.config_hash << " base_seed=" << meta.base_seed
      << " trial_seed=" << record.seed << "\n";
  out << "step,x,y,z,roll,pitch,yaw,rx,ry,rz,rroll,rpitch,ryaw,error_norm,"
         "tracking_cost,input_cost,pose_cost,accumulated_cost,pose_switch\n";
  double running = 0;
  for (const StepRecord& s : record.steps) {
    running += s.tracking_cost + s.input_cost + s.pose_cost;
    out << s.k;
    for (int i = 0; i < 6; ++i) out << ',' << s.pose[i];
    for (int i = 0; i < 6; ++i) out << ',' << s.reference[i];
    out << ',' << s.error.norm() << ',' << s.tracking_cost << ',' << s.input_cost
        << ',' << s.pose_cost << ',' << running << ',' << (s.pose_switch ? 1 : 0)
        << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows,
                      const ArtifactMeta& meta) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write timing csv: " + path);
  out << "# config_hash=" << meta.config_hash << " base_seed=" << meta.base_seed
      << "\n";
  out << "candidates,horizon,threads,plans,median_us,mean_us,p90_us\n";
  for (const TimingRow& r : rows) {
    out << r.candidate_count << ',' << r.horizon << ',' << r.threads << ','
        << r.plans << ',' << r.median_us << ',' << r.mean_us << ',' << r.p90_us
        << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace mmpc
