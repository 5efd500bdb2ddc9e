#include "mmpc/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace mmpc {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Curve B heading schedule [rad]: straight runs broken by sharp turns.
// Eight segments; turns alternate sign so the path stays compact.
constexpr double kCurveBHeadingsDeg[] = {0., 55., 0., -50., 5., 60., 10., -45.};
constexpr int kCurveBSegments = 8;
constexpr double kPathSpeed = 0.11;  // m/s along the path

}  // namespace

std::vector<Vector6d> make_nominal(TrajectoryKind kind, int steps, double tau,
                                   const Vector6d& anchor) {
  if (steps < 2) throw ConfigError("nominal trajectory needs at least 2 steps");
  if (!(tau > 0)) throw ConfigError("nominal trajectory requires tau > 0");
  if (kind == TrajectoryKind::kFile) {
    throw ConfigError("file trajectories are loaded, not generated");
  }
  std::vector<Vector6d> poses(steps + 1, anchor);
  const double total = steps * tau;
  if (kind == TrajectoryKind::kCurveA) {
    // Gentle S-curve: constant forward speed, one lateral period, small
    // height wave.
    const double b = 2.0 * kPi / total;
    for (int k = 0; k <= steps; ++k) {
      const double t = k * tau;
      poses[k][0] += kPathSpeed * t;
      poses[k][1] += 0.6 * std::sin(b * t);
      poses[k][2] += 0.05 * std::sin(0.5 * b * t);
    }
  } else {
    const int seg = steps / kCurveBSegments > 0 ? steps / kCurveBSegments : 1;
    double x = 0., y = 0.;
    for (int k = 1; k <= steps; ++k) {
      const int s = std::min((k - 1) / seg, kCurveBSegments - 1);
      const double h = kCurveBHeadingsDeg[s] * kPi / 180.0;
      x += kPathSpeed * tau * std::cos(h);
      y += kPathSpeed * tau * std::sin(h);
      poses[k][0] += x;
      poses[k][1] += y;
      poses[k][2] += 0.04 * std::sin(4.0 * kPi * (k * tau) / total);
    }
  }
  return poses;
}

std::vector<Vector6d> load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file: " + path);
  std::vector<Vector6d> poses;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Vector6d pose;
    if (!(ls >> pose[0])) continue;
    for (int i = 1; i < 6; ++i) {
      if (!(ls >> pose[i])) {
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": expected 6 fields (x y z roll pitch yaw)");
      }
    }
    if (!pose.allFinite()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": non-finite pose");
    }
    poses.push_back(pose);
  }
  if (poses.size() < 2) {
    throw ConfigError("trajectory file has fewer than 2 poses: " + path);
  }
  return poses;
}

void save_trajectory(const std::string& path, const std::vector<Vector6d>& poses,
                     const std::vector<std::string>& header_comments) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trajectory file: " + path);
  out.precision(17);
  for (const auto& c : header_comments) out << "# " << c << "\n";
  for (const auto& p : poses) {
    out << p[0] << ' ' << p[1] << ' ' << p[2] << ' ' << p[3] << ' ' << p[4]
        << ' ' << p[5] << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

Eigen::Matrix<double, 6, 3> disturbance_injection() {
  Eigen::Matrix<double, 6, 3> d = Eigen::Matrix<double, 6, 3>::Zero();
  d.topRows<3>().setIdentity();
  return d;
}

DisturbedTrajectory realize_disturbance(const ReferenceModel& model) {
  if (model.nominal.empty()) throw ConfigError("reference model has no poses");
  if (!model.sigma.allFinite() ||
      (model.sigma - model.sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("disturbance covariance must be finite and symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(model.sigma);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw ConfigError("disturbance covariance is not positive semidefinite");
  }
  const Eigen::Matrix3d sqrt_sigma =
      eig.eigenvectors() *
      eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      eig.eigenvectors().transpose();

  std::mt19937_64 rng(model.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DisturbedTrajectory out;
  out.seed = model.seed;
  out.draws.resize(model.nominal.size());
  out.realized.resize(model.nominal.size());
  Eigen::Vector3d cum = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < model.nominal.size(); ++k) {
    Eigen::Vector3d z(gauss(rng), gauss(rng), gauss(rng));
    out.draws[k] = sqrt_sigma * z;
    cum += out.draws[k];
    out.realized[k] = model.nominal[k];
    out.realized[k].head<3>() += cum;
  }
  return out;
}

std::vector<Vector6d> predict_window(const Predictor& predictor,
                                     const std::vector<Vector6d>& history,
                                     const std::vector<Vector6d>& nominal, int k,
                                     int horizon, bool* clamped) {
  if (horizon < 1) throw ConfigError("prediction horizon must be >= 1");
  if (clamped != nullptr) *clamped = false;
  std::vector<Vector6d> window(horizon + 1);
  if (predictor.mode == PredictorMode::kOracleNominal) {
    if (nominal.empty()) throw ConfigError("oracle predictor needs a nominal trajectory");
    const int last = static_cast<int>(nominal.size()) - 1;
    for (int i = 0; i <= horizon; ++i) {
      const int idx = k + i;
      if (idx > last && clamped != nullptr) *clamped = true;
      window[i] = nominal[std::min(idx, last)];
    }
  } else {
    if (history.empty()) {
      throw ConfigError("constant-velocity predictor needs at least one observation");
    }
    const Vector6d& last = history.back();
    Eigen::Vector3d step = Eigen::Vector3d::Zero();
    if (history.size() >= 2) {
      step = last.head<3>() - history[history.size() - 2].head<3>();
    }
    for (int i = 0; i <= horizon; ++i) {
      window[i] = last;
      window[i].head<3>() += i * step;
    }
  }
  return window;
}

}  // namespace mmpc
