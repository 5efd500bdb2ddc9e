#ifndef MMPC_CONFIG_HPP_
#define MMPC_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mmpc/harness.hpp"

namespace mmpc {

/// Bench-only sweep settings ([bench] section).
struct BenchConfig {
  int plans{500};
  std::vector<int> candidate_counts{1, 12};
  std::vector<int> horizons{3, 5, 8};
  std::vector<int> thread_widths{1, 16};
};

/// Parsed run configuration. Flat key=value sections; unknown keys are
/// rejected so configs stay reproducible. tau, horizon, Q, R and kappa
/// have no in-code defaults and must appear explicitly.
struct RunConfig {
  std::string chain_file;
  std::string limits_file;  // optional

  std::string trajectory_kind{"curve-B"};
  std::string trajectory_file;
  int steps{500};

  double q{0.4};
  Eigen::Vector3d sigma_base_diag{0.015 * 0.015, 0.025 * 0.025, 0.015 * 0.015};

  double tau{0};      // required
  int horizon{0};     // required
  double q_scale{0};  // required
  double r_scale{0};  // required
  double kappa{-1};   // required

  int candidate_count{12};
  double perturb_radius{0.1};
  int max_joints_perturbed{0};
  bool perturb_heading{true};
  int periodic_interval{5};
  std::string e0_mode{"recompute"};
  double max_joint_rate{0};
  double max_base_velocity{0};
  bool zero_planner_sigma{false};

  std::string predictor{"oracle"};
  int history_window{10};

  std::string variant{"PO-HU"};
  int trials{20};
  std::uint64_t base_seed{1};
  std::vector<double> theta_start;       // empty = zeros
  std::vector<double> start_offset;      // empty = zeros

  std::string output_directory{"out"};
  bool write_trial_csv{true};
  bool write_plan_jsonl{false};

  BenchConfig bench;

  std::string config_hash;  // FNV-1a of the raw config text
  std::string source_path;
};

/// Parses and validates a config file. Throws ConfigError with the
/// offending section/key in the message.
RunConfig load_config(const std::string& path);

/// Parses from text (used by tests and by load_config).
RunConfig parse_config_text(const std::string& text, const std::string& origin);

/// Builds the experiment description, loading chain and limit files.
ExperimentSpec to_experiment_spec(const RunConfig& config);

/// Canonical echo of every effective setting, for the report artifact.
std::string config_echo_json(const RunConfig& config);

/// FNV-1a 64-bit fingerprint used to stamp artifacts.
std::string fingerprint(const std::string& text);

}  // namespace mmpc

#endif  // MMPC_CONFIG_HPP_
