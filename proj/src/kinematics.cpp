#include "mmpc/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace mmpc {

namespace {

Eigen::Matrix4d dh_transform(const DhRow& row, double theta) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Eigen::Matrix4d t;
  t << ct, -st * ca,  st * sa, row.a * ct,
       st,  ct * ca, -ct * sa, row.a * st,
       0.,  sa,       ca,      row.d,
       0.,  0.,       0.,      1.;
  return t;
}

// Frames 0..n, frame 0 = identity (base frame).
std::vector<Eigen::Matrix4d> link_frames(const DhChain& chain,
                                         const Eigen::VectorXd& theta) {
  if (theta.size() != chain.dof()) {
    throw ConfigError("joint vector has " + std::to_string(theta.size()) +
                      " entries, chain expects " + std::to_string(chain.dof()));
  }
  std::vector<Eigen::Matrix4d> frames(chain.dof() + 1);
  frames[0].setIdentity();
  for (int i = 0; i < chain.dof(); ++i) {
    const DhRow& row = chain.rows()[i];
    frames[i + 1] = frames[i] * dh_transform(row, theta[i] + row.theta_offset);
  }
  return frames;
}

Eigen::Vector3d euler_zyx(const Eigen::Matrix3d& r) {
  Eigen::Vector3d e;
  e[0] = std::atan2(r(2, 1), r(2, 2));
  e[1] = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  e[2] = std::atan2(r(1, 0), r(0, 0));
  return e;
}

// omega_world = T(euler) * euler_rates for ZYX angles.
Eigen::Matrix3d euler_rate_map(const Eigen::Vector3d& euler) {
  const double cp = std::cos(euler[1]), sp = std::sin(euler[1]);
  const double cy = std::cos(euler[2]), sy = std::sin(euler[2]);
  Eigen::Matrix3d t;
  t << cy * cp, -sy, 0.,
       sy * cp,  cy, 0.,
       -sp,      0., 1.;
  return t;
}

}  // namespace

DhChain::DhChain(std::vector<DhRow> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw ConfigError("DH chain needs at least one joint");
  for (const DhRow& r : rows_) {
    if (!std::isfinite(r.a) || !std::isfinite(r.alpha) || !std::isfinite(r.d) ||
        !std::isfinite(r.theta_offset)) {
      throw ConfigError("DH chain contains non-finite entries");
    }
  }
}

DhChain DhChain::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open DH chain file: " + path);
  std::vector<DhRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    DhRow row;
    if (!(ls >> row.a)) continue;  // blank or comment-only line
    if (!(ls >> row.alpha >> row.d >> row.theta_offset)) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 4 fields (a alpha d theta_offset)");
    }
    double extra;
    if (ls >> extra) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": trailing fields after theta_offset");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw ConfigError("DH chain file has no rows: " + path);
  return DhChain(std::move(rows));
}

JointLimits JointLimits::unbounded(int dof) {
  JointLimits l;
  const double inf = std::numeric_limits<double>::infinity();
  l.lower = Eigen::VectorXd::Constant(dof, -inf);
  l.upper = Eigen::VectorXd::Constant(dof, inf);
  return l;
}

JointLimits JointLimits::from_file(const std::string& path, int expected_dof) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open joint-limit file: " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double lo, hi;
    if (!(ls >> lo)) continue;
    if (!(ls >> hi)) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 2 fields (lower upper)");
    }
    if (lo > hi) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": lower limit exceeds upper limit");
    }
    rows.emplace_back(lo, hi);
  }
  if (static_cast<int>(rows.size()) != expected_dof) {
    throw ConfigError("joint-limit file has " + std::to_string(rows.size()) +
                      " rows, chain expects " + std::to_string(expected_dof));
  }
  JointLimits l;
  l.lower.resize(expected_dof);
  l.upper.resize(expected_dof);
  for (int i = 0; i < expected_dof; ++i) {
    l.lower[i] = rows[i].first;
    l.upper[i] = rows[i].second;
  }
  return l;
}

bool JointLimits::contains(const Eigen::VectorXd& theta) const {
  return (theta.array() >= lower.array()).all() &&
         (theta.array() <= upper.array()).all();
}

Eigen::VectorXd JointLimits::clamp(const Eigen::VectorXd& theta) const {
  return theta.cwiseMax(lower).cwiseMin(upper);
}

Vector6d forward_kinematics(const DhChain& chain, const Eigen::VectorXd& theta) {
  const Eigen::Matrix4d tip = link_frames(chain, theta).back();
  Vector6d pose;
  pose.head<3>() = tip.block<3, 1>(0, 3);
  pose.tail<3>() = euler_zyx(tip.block<3, 3>(0, 0));
  return pose;
}

Eigen::MatrixXd jacobian(const DhChain& chain, const Eigen::VectorXd& theta,
                         JacobianHealth* health) {
  const auto frames = link_frames(chain, theta);
  const Eigen::Vector3d tip = frames.back().block<3, 1>(0, 3);
  const int n = chain.dof();
  Eigen::MatrixXd j(6, n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d axis = frames[i].block<3, 1>(0, 2);
    const Eigen::Vector3d origin = frames[i].block<3, 1>(0, 3);
    j.block<3, 1>(0, i) = axis.cross(tip - origin);
    j.block<3, 1>(3, i) = axis;
  }
  const Eigen::Vector3d euler = euler_zyx(frames.back().block<3, 3>(0, 0));
  // Map world angular velocity to Euler-angle rates. The map loses rank at
  // |pitch| = pi/2; condition follows from T^T T having eigenvalues
  // {1, 1 +- |sin(pitch)|}.
  const Eigen::Matrix3d t = euler_rate_map(euler);
  const double s = std::min(std::abs(std::sin(euler[1])), 1.0);
  const double cond =
      s < 1.0 ? std::sqrt((1.0 + s) / (1.0 - s)) : std::numeric_limits<double>::infinity();
  if (health != nullptr) {
    health->condition = cond;
    health->near_singular = !(cond < 1e8);
  }
  j.bottomRows<3>() = t.partialPivLu().solve(j.bottomRows<3>());
  return j;
}

BaseState base_step(const BaseState& state, double v, double eta, double tau) {
  if (!(tau > 0)) throw ConfigError("base_step requires tau > 0");
  BaseState next;
  next.x = state.x + tau * v * std::cos(state.phi);
  next.y = state.y + tau * v * std::sin(state.phi);
  next.phi = state.phi + tau * eta;
  return next;
}

Eigen::MatrixXd whole_body_input_matrix(const DhChain& chain,
                                        const Eigen::VectorXd& theta, double tau,
                                        JacobianHealth* health) {
  if (!(tau > 0)) throw ConfigError("input matrix requires tau > 0");
  const int n = chain.dof();
  Eigen::MatrixXd b(6, n + 1);
  b.rightCols(n) = jacobian(chain, theta, health);  // validates theta size
  b.col(0).setZero();
  b(0, 0) = std::cos(theta[0]);
  b(1, 0) = std::sin(theta[0]);
  b *= tau;
  return b;
}

Vector6d whole_body_pose(const DhChain& chain, const BaseState& base,
                         const Eigen::VectorXd& theta) {
  if (theta.size() != chain.dof()) {
    throw ConfigError("joint vector size does not match chain");
  }
  if (std::abs(base.phi - theta[0]) > 1e-12) {
    throw ConfigError("base heading and theta[0] disagree: " +
                      std::to_string(base.phi) + " vs " + std::to_string(theta[0]));
  }
  Vector6d pose = forward_kinematics(chain, theta);
  pose[0] += base.x;
  pose[1] += base.y;
  return pose;
}

}  // namespace mmpc
