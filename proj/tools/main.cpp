#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mmpc/config.hpp"
#include "mmpc/harness.hpp"
#include "mmpc/riccati.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct CommonOptions {
  std::string config_path;
  int threads{0};  // 0 = hardware concurrency
  std::string out_override;
  std::optional<std::uint64_t> seed_override;
};

// Removes files created by a failed run so no partial artifacts remain.
class ArtifactSink {
 public:
  explicit ArtifactSink(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }
  fs::path reserve(const std::string& name) {
    created_.push_back(dir_ / name);
    return created_.back();
  }
  void commit() { created_.clear(); }
  ~ArtifactSink() {
    for (const auto& p : created_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

 private:
  fs::path dir_;
  std::vector<fs::path> created_;
};

mmpc::RunConfig load(const CommonOptions& opts) {
  mmpc::RunConfig cfg = mmpc::load_config(opts.config_path);
  if (!opts.out_override.empty()) cfg.output_directory = opts.out_override;
  if (opts.seed_override) cfg.base_seed = *opts.seed_override;
  return cfg;
}

int thread_count(const CommonOptions& opts) {
  if (opts.threads > 0) return opts.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

Json report_stats(const mmpc::AggregateReport& report) {
  Json j;
  j["trials_requested"] = report.trials_requested;
  j["trials_completed"] = report.trials_completed;
  j["failures"] = report.failures;
  j["unreliable"] = report.unreliable;
  j["mean_total_cost"] = report.mean_cost;
  j["stddev_total_cost"] = report.stddev_cost;
  j["per_trial_cost"] = report.per_trial_cost;
  j["per_trial_seed"] = report.per_trial_seed;
  j["mean_accumulated_cost"] = report.mean_accumulated;
  return j;
}

int cmd_run(const CommonOptions& opts) {
  const mmpc::RunConfig cfg = load(opts);
  const mmpc::ExperimentSpec spec = mmpc::to_experiment_spec(cfg);
  const mmpc::ArtifactMeta meta{cfg.config_hash, cfg.base_seed};

  mmpc::ThreadPool pool(thread_count(opts));
  const mmpc::AggregateReport report = mmpc::run_experiment(spec, &pool);

  ArtifactSink sink(cfg.output_directory);
  if (cfg.write_trial_csv) {
    for (int i = 0; i < spec.trials; ++i) {
      const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(i);
      const mmpc::TrialRecord record = mmpc::run_trial(spec, seed);
      if (record.failed) continue;
      mmpc::write_trial_csv(
          sink.reserve("trial_" + std::to_string(seed) + ".csv").string(), record,
          meta);
    }
  }

  Json j;
  j["config"] = Json::parse(mmpc::config_echo_json(cfg));
  j["results"] = report_stats(report);
  const fs::path report_path = sink.reserve("report.json");
  {
    std::ofstream out(report_path);
    if (!out) throw mmpc::IoError("cannot write report: " + report_path.string());
    out << j.dump(2) << "\n";
  }
  sink.commit();
  std::cout << "variant " << mmpc::variant_name(spec.variant) << ": mean C_total "
            << report.mean_cost << " over " << report.trials_completed
            << " trials (stddev " << report.stddev_cost << ")\n";
  std::cout << "artifacts in " << cfg.output_directory << "\n";
  if (report.unreliable) {
    std::cerr << "warning: more than 10% of trials failed; report marked unreliable\n";
  }
  return 0;
}

int cmd_bench(const CommonOptions& opts) {
  const mmpc::RunConfig cfg = load(opts);
  const mmpc::ExperimentSpec spec = mmpc::to_experiment_spec(cfg);
  std::vector<int> widths = cfg.bench.thread_widths;
  if (opts.threads > 0) widths = {opts.threads};

  const auto rows = mmpc::benchmark_planning(spec, cfg.bench.candidate_counts,
                                             cfg.bench.horizons, widths,
                                             cfg.bench.plans);
  ArtifactSink sink(cfg.output_directory);
  const fs::path path = sink.reserve("timings.csv");
  mmpc::write_timing_csv(path.string(), rows, {cfg.config_hash, cfg.base_seed});
  sink.commit();
  for (const auto& r : rows) {
    std::cout << "candidates=" << r.candidate_count << " H=" << r.horizon
              << " threads=" << r.threads << " median " << r.median_us
              << " us (mean " << r.mean_us << ", p90 " << r.p90_us << ")\n";
  }
  std::cout << "timings written to " << path.string() << "\n";
  return 0;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

int cmd_plan_debug(const CommonOptions& opts, int step) {
  const mmpc::RunConfig cfg = load(opts);
  const mmpc::ExperimentSpec spec = mmpc::to_experiment_spec(cfg);
  const mmpc::PlanResult plan = mmpc::replan_at_step(spec, spec.base_seed, step);

  Json j;
  j["config_hash"] = cfg.config_hash;
  j["seed"] = spec.base_seed;
  j["step"] = step;
  j["chosen_index"] = plan.chosen_index;
  j["chosen"] = to_vec(plan.chosen);
  j["predicted_cost"] = plan.predicted_cost;
  j["candidate_costs"] = plan.candidate_costs;
  j["pose_command"] = to_vec(plan.pose_command);
  j["control"] = to_vec(plan.control);
  j["error0"] = to_vec(plan.error0);
  j["fallback"] = plan.fallback;
  Json value;
  for (std::size_t k = 0; k < plan.solution.P.size(); ++k) {
    Json entry;
    entry["k"] = k;
    const auto& pk = plan.solution.P[k];
    entry["P"] = std::vector<double>(pk.data(), pk.data() + pk.size());
    entry["p"] = to_vec(plan.solution.p[k]);
    entry["c"] = plan.solution.c[k];
    value.push_back(entry);
  }
  j["value_function"] = value;

  ArtifactSink sink(cfg.output_directory);
  const fs::path path = sink.reserve("plan_debug_" + std::to_string(step) + ".json");
  {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
  }
  sink.commit();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_validate(const CommonOptions& opts) {
  const mmpc::RunConfig cfg = load(opts);
  mmpc::to_experiment_spec(cfg);  // exercises file loading too
  std::cout << "config ok: " << cfg.source_path << " (hash " << cfg.config_hash
            << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whole-body MPC trajectory tracking with sampling-based pose optimization"};
  app.require_subcommand(1);

  CommonOptions opts;
  int debug_step = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config_path, "run configuration file")
        ->required();
    cmd->add_option("--threads", opts.threads, "worker threads (default: hardware)");
    cmd->add_option("--out", opts.out_override, "output directory override");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { opts.seed_override = s; },
        "base seed override");
  };

  CLI::App* run = app.add_subcommand("run", "run a Monte Carlo experiment");
  add_common(run);
  CLI::App* bench = app.add_subcommand("bench", "measure planning time");
  add_common(bench);
  CLI::App* plan = app.add_subcommand("plan-debug", "dump one planning step");
  add_common(plan);
  plan->add_option("--step", debug_step, "trajectory step to inspect")->required();
  CLI::App* validate = app.add_subcommand("validate-config", "parse and check a config");
  add_common(validate);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(opts);
    if (bench->parsed()) return cmd_bench(opts);
    if (plan->parsed()) return cmd_plan_debug(opts, debug_step);
    if (validate->parsed()) return cmd_validate(opts);
  } catch (const mmpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const mmpc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const mmpc::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
