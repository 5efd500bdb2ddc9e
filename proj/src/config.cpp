#include "mmpc/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mmpc {

namespace {

using Json = nlohmann::json;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

class KeyTable {
 public:
  void add(const std::string& section, const std::string& key,
           const std::string& value, const std::string& origin, int lineno) {
    const std::string full = section + "." + key;
    if (values_.count(full) != 0) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key " + full);
    }
    values_[full] = value;
  }

  bool has(const std::string& full) const { return values_.count(full) != 0; }

  std::string take(const std::string& full) {
    auto it = values_.find(full);
    if (it == values_.end()) throw ConfigError("missing required key " + full);
    consumed_.insert(full);
    return it->second;
  }

  bool take_optional(const std::string& full, std::string* out) {
    auto it = values_.find(full);
    if (it == values_.end()) return false;
    consumed_.insert(full);
    *out = it->second;
    return true;
  }

  void reject_unknown(const std::string& origin) const {
    for (const auto& [key, value] : values_) {
      if (consumed_.count(key) == 0) {
        throw ConfigError(origin + ": unknown key " + key);
      }
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

double parse_double(const std::string& full, const std::string& raw) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("trailing");
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(full + ": cannot parse '" + raw + "' as a number");
  }
}

std::int64_t parse_int(const std::string& full, const std::string& raw) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(full + ": cannot parse '" + raw + "' as an integer");
  }
}

bool parse_bool(const std::string& full, const std::string& raw) {
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  throw ConfigError(full + ": cannot parse '" + raw + "' as a boolean");
}

std::vector<double> parse_doubles(const std::string& full, const std::string& raw) {
  std::istringstream in(raw);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(full, tok));
  return out;
}

std::vector<int> parse_ints(const std::string& full, const std::string& raw) {
  std::istringstream in(raw);
  std::vector<int> out;
  std::string tok;
  while (in >> tok) out.push_back(static_cast<int>(parse_int(full, tok)));
  return out;
}

}  // namespace

std::string fingerprint(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  KeyTable table;
  {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw ConfigError(origin + ":" + std::to_string(lineno) +
                            ": malformed section header");
        }
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": expected key = value");
      }
      if (section.empty()) {
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": key outside any [section]");
      }
      table.add(section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
                origin, lineno);
    }
  }

  RunConfig cfg;
  cfg.source_path = origin;
  cfg.config_hash = fingerprint(text);
  std::string raw;

  cfg.chain_file = table.take("chain.dh_file");
  if (table.take_optional("chain.limits_file", &raw)) cfg.limits_file = raw;

  if (table.take_optional("trajectory.kind", &raw)) cfg.trajectory_kind = raw;
  if (cfg.trajectory_kind != "curve-A" && cfg.trajectory_kind != "curve-B" &&
      cfg.trajectory_kind != "file") {
    throw ConfigError("trajectory.kind: expected curve-A, curve-B or file");
  }
  if (table.take_optional("trajectory.file", &raw)) cfg.trajectory_file = raw;
  if (cfg.trajectory_kind == "file" && cfg.trajectory_file.empty()) {
    throw ConfigError("trajectory.file is required when trajectory.kind = file");
  }
  if (table.take_optional("trajectory.steps", &raw)) {
    cfg.steps = static_cast<int>(parse_int("trajectory.steps", raw));
  }
  if (cfg.steps < 2) throw ConfigError("trajectory.steps: must be >= 2");

  if (table.take_optional("disturbance.q", &raw)) {
    cfg.q = parse_double("disturbance.q", raw);
  }
  if (cfg.q < 0) throw ConfigError("disturbance.q: must be >= 0");
  if (table.take_optional("disturbance.sigma_base_diag", &raw)) {
    const auto v = parse_doubles("disturbance.sigma_base_diag", raw);
    if (v.size() != 3) {
      throw ConfigError("disturbance.sigma_base_diag: expected 3 entries");
    }
    for (double x : v) {
      if (x < 0) throw ConfigError("disturbance.sigma_base_diag: entries must be >= 0");
    }
    cfg.sigma_base_diag = Eigen::Vector3d(v[0], v[1], v[2]);
  }

  // Physical parameters: always explicit, never defaulted in code.
  cfg.tau = parse_double("mpc.tau", table.take("mpc.tau"));
  cfg.horizon = static_cast<int>(parse_int("mpc.horizon", table.take("mpc.horizon")));
  cfg.q_scale = parse_double("mpc.q_scale", table.take("mpc.q_scale"));
  cfg.r_scale = parse_double("mpc.r_scale", table.take("mpc.r_scale"));
  cfg.kappa = parse_double("mpc.kappa", table.take("mpc.kappa"));
  if (!(cfg.tau > 0)) throw ConfigError("mpc.tau: must be positive");
  if (cfg.horizon < 1) throw ConfigError("mpc.horizon: must be >= 1");
  if (cfg.q_scale < 0) throw ConfigError("mpc.q_scale: must be >= 0");
  if (!(cfg.r_scale > 0)) throw ConfigError("mpc.r_scale: must be positive");
  if (cfg.kappa < 0) throw ConfigError("mpc.kappa: must be >= 0");

  if (table.take_optional("planner.candidate_count", &raw)) {
    cfg.candidate_count = static_cast<int>(parse_int("planner.candidate_count", raw));
  }
  if (cfg.candidate_count < 1) throw ConfigError("planner.candidate_count: must be >= 1");
  if (table.take_optional("planner.perturb_radius", &raw)) {
    cfg.perturb_radius = parse_double("planner.perturb_radius", raw);
  }
  if (!(cfg.perturb_radius > 0)) throw ConfigError("planner.perturb_radius: must be positive");
  if (table.take_optional("planner.max_joints_perturbed", &raw)) {
    cfg.max_joints_perturbed =
        static_cast<int>(parse_int("planner.max_joints_perturbed", raw));
  }
  if (table.take_optional("planner.perturb_heading", &raw)) {
    cfg.perturb_heading = parse_bool("planner.perturb_heading", raw);
  }
  if (table.take_optional("planner.periodic_interval", &raw)) {
    cfg.periodic_interval = static_cast<int>(parse_int("planner.periodic_interval", raw));
  }
  if (cfg.periodic_interval < 1) throw ConfigError("planner.periodic_interval: must be >= 1");
  if (table.take_optional("planner.e0_mode", &raw)) cfg.e0_mode = raw;
  if (cfg.e0_mode != "recompute" && cfg.e0_mode != "fixed") {
    throw ConfigError("planner.e0_mode: expected recompute or fixed");
  }
  if (table.take_optional("planner.max_joint_rate", &raw)) {
    cfg.max_joint_rate = parse_double("planner.max_joint_rate", raw);
  }
  if (table.take_optional("planner.max_base_velocity", &raw)) {
    cfg.max_base_velocity = parse_double("planner.max_base_velocity", raw);
  }
  if (table.take_optional("planner.zero_sigma", &raw)) {
    cfg.zero_planner_sigma = parse_bool("planner.zero_sigma", raw);
  }

  if (table.take_optional("predictor.mode", &raw)) cfg.predictor = raw;
  if (cfg.predictor != "oracle" && cfg.predictor != "constant-velocity") {
    throw ConfigError("predictor.mode: expected oracle or constant-velocity");
  }
  if (table.take_optional("predictor.history_window", &raw)) {
    cfg.history_window = static_cast<int>(parse_int("predictor.history_window", raw));
  }

  if (table.take_optional("harness.variant", &raw)) cfg.variant = raw;
  variant_from_name(cfg.variant);  // validates
  if (table.take_optional("harness.trials", &raw)) {
    cfg.trials = static_cast<int>(parse_int("harness.trials", raw));
  }
  if (cfg.trials < 1) throw ConfigError("harness.trials: must be >= 1");
  if (table.take_optional("harness.base_seed", &raw)) {
    cfg.base_seed = static_cast<std::uint64_t>(parse_int("harness.base_seed", raw));
  }
  if (table.take_optional("harness.theta_start", &raw)) {
    cfg.theta_start = parse_doubles("harness.theta_start", raw);
  }
  if (table.take_optional("harness.start_offset", &raw)) {
    cfg.start_offset = parse_doubles("harness.start_offset", raw);
    if (cfg.start_offset.size() != 6) {
      throw ConfigError("harness.start_offset: expected 6 entries");
    }
  }

  if (table.take_optional("output.directory", &raw)) cfg.output_directory = raw;
  if (table.take_optional("output.write_trial_csv", &raw)) {
    cfg.write_trial_csv = parse_bool("output.write_trial_csv", raw);
  }
  if (table.take_optional("output.write_plan_jsonl", &raw)) {
    cfg.write_plan_jsonl = parse_bool("output.write_plan_jsonl", raw);
  }

  if (table.take_optional("bench.plans", &raw)) {
    cfg.bench.plans = static_cast<int>(parse_int("bench.plans", raw));
  }
  if (table.take_optional("bench.candidate_counts", &raw)) {
    cfg.bench.candidate_counts = parse_ints("bench.candidate_counts", raw);
  }
  if (table.take_optional("bench.horizons", &raw)) {
    cfg.bench.horizons = parse_ints("bench.horizons", raw);
  }
  if (table.take_optional("bench.thread_widths", &raw)) {
    cfg.bench.thread_widths = parse_ints("bench.thread_widths", raw);
  }

  table.reject_unknown(origin);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

ExperimentSpec to_experiment_spec(const RunConfig& config) {
  ExperimentSpec spec;
  spec.chain = DhChain::from_file(config.chain_file);
  spec.limits = config.limits_file.empty()
                    ? JointLimits::unbounded(spec.chain.dof())
                    : JointLimits::from_file(config.limits_file, spec.chain.dof());

  if (config.trajectory_kind == "curve-A") spec.kind = TrajectoryKind::kCurveA;
  else if (config.trajectory_kind == "curve-B") spec.kind = TrajectoryKind::kCurveB;
  else spec.kind = TrajectoryKind::kFile;
  spec.trajectory_file = config.trajectory_file;
  spec.steps = config.steps;

  spec.disturbance_scale = config.q;
  spec.sigma_base_diag = config.sigma_base_diag;

  spec.q_scale = config.q_scale;
  spec.r_scale = config.r_scale;
  spec.kappa = config.kappa;
  spec.horizon = config.horizon;
  spec.tau = config.tau;

  spec.policy.count = config.candidate_count;
  spec.policy.perturb_radius = config.perturb_radius;
  spec.policy.max_joints_perturbed = config.max_joints_perturbed;
  spec.policy.perturb_heading = config.perturb_heading;
  spec.e0_mode = config.e0_mode == "fixed" ? InitialErrorMode::kFixed
                                           : InitialErrorMode::kRecompute;
  spec.control_limits.max_joint_rate = config.max_joint_rate;
  spec.control_limits.max_base_velocity = config.max_base_velocity;
  spec.force_planner_sigma_zero = config.zero_planner_sigma;

  spec.predictor = config.predictor == "oracle" ? PredictorMode::kOracleNominal
                                                : PredictorMode::kConstantVelocity;
  spec.history_window = config.history_window;

  spec.variant = variant_from_name(config.variant);
  spec.periodic_interval = config.periodic_interval;
  spec.trials = config.trials;
  spec.base_seed = config.base_seed;

  if (!config.theta_start.empty()) {
    spec.theta_start = Eigen::Map<const Eigen::VectorXd>(
        config.theta_start.data(), static_cast<Eigen::Index>(config.theta_start.size()));
  }
  if (!config.start_offset.empty()) {
    spec.start_offset = Eigen::Map<const Vector6d>(config.start_offset.data());
  }
  return spec;
}

std::string config_echo_json(const RunConfig& config) {
  Json j;
  j["chain"] = {{"dh_file", config.chain_file}, {"limits_file", config.limits_file}};
  j["trajectory"] = {{"kind", config.trajectory_kind},
                     {"file", config.trajectory_file},
                     {"steps", config.steps}};
  j["disturbance"] = {{"q", config.q},
                      {"sigma_base_diag",
                       {config.sigma_base_diag[0], config.sigma_base_diag[1],
                        config.sigma_base_diag[2]}}};
  j["mpc"] = {{"tau", config.tau},
              {"horizon", config.horizon},
              {"q_scale", config.q_scale},
              {"r_scale", config.r_scale},
              {"kappa", config.kappa}};
  j["planner"] = {{"candidate_count", config.candidate_count},
                  {"perturb_radius", config.perturb_radius},
                  {"max_joints_perturbed", config.max_joints_perturbed},
                  {"perturb_heading", config.perturb_heading},
                  {"periodic_interval", config.periodic_interval},
                  {"e0_mode", config.e0_mode},
                  {"max_joint_rate", config.max_joint_rate},
                  {"max_base_velocity", config.max_base_velocity},
                  {"zero_sigma", config.zero_planner_sigma}};
  j["predictor"] = {{"mode", config.predictor},
                    {"history_window", config.history_window}};
  j["harness"] = {{"variant", config.variant},
                  {"trials", config.trials},
                  {"base_seed", config.base_seed},
                  {"theta_start", config.theta_start},
                  {"start_offset", config.start_offset}};
  j["output"] = {{"directory", config.output_directory},
                 {"write_trial_csv", config.write_trial_csv},
                 {"write_plan_jsonl", config.write_plan_jsonl}};
  j["bench"] = {{"plans", config.bench.plans},
                {"candidate_counts", config.bench.candidate_counts},
                {"horizons", config.bench.horizons},
                {"thread_widths", config.bench.thread_widths}};
  j["config_hash"] = config.config_hash;
  return j.dump(2);
}

}  // namespace mmpc
