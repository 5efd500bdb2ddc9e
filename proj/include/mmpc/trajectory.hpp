#ifndef MMPC_TRAJECTORY_HPP_
#define MMPC_TRAJECTORY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mmpc/types.hpp"

namespace mmpc {

enum class TrajectoryKind {
  kCurveA,  // smooth, low curvature
  kCurveB,  // piecewise segments with sharp turns
  kFile,
};

/// Generates a nominal reference of steps+1 poses spaced tau seconds apart,
/// starting at `anchor` and holding its orientation. kFile is handled by
/// load_trajectory instead.
std::vector<Vector6d> make_nominal(TrajectoryKind kind, int steps, double tau,
                                   const Vector6d& anchor);

/// One pose per line: x y z roll pitch yaw, whitespace separated.
std::vector<Vector6d> load_trajectory(const std::string& path);
void save_trajectory(const std::string& path, const std::vector<Vector6d>& poses,
                     const std::vector<std::string>& header_comments);

/// Constant injection matrix: disturbances act on position only.
Eigen::Matrix<double, 6, 3> disturbance_injection();

/// Nominal trajectory plus the disturbance model that corrupts it.
struct ReferenceModel {
  std::vector<Vector6d> nominal;
  Eigen::Matrix3d sigma;  // per-step covariance of the position disturbance
  std::uint64_t seed{0};
};

struct DisturbedTrajectory {
  std::vector<Vector6d> realized;
  std::vector<Eigen::Vector3d> draws;  // i.i.d. N(0, sigma), one per pose
  std::uint64_t seed{0};
};

/// Realizes r(k) = nominal(k) + D * sum_{j<=k} draws(j). Draws are sampled
/// through the symmetric square root of sigma so singular PSD covariances
/// (including sigma = 0) are handled uniformly. Deterministic in the seed.
DisturbedTrajectory realize_disturbance(const ReferenceModel& model);

enum class PredictorMode {
  kOracleNominal,     // future references known exactly
  kConstantVelocity,  // extrapolate last observed position step
};

struct Predictor {
  PredictorMode mode{PredictorMode::kOracleNominal};
  int history_window{10};
};

/// Returns horizon+1 poses representing the robot's view of the reference
/// over [k, k+horizon]. Windows that overrun the trajectory end clamp to
/// the final pose and set *clamped.
std::vector<Vector6d> predict_window(const Predictor& predictor,
                                     const std::vector<Vector6d>& history,
                                     const std::vector<Vector6d>& nominal, int k,
                                     int horizon, bool* clamped = nullptr);

}  // namespace mmpc

#endif  // MMPC_TRAJECTORY_HPP_
