#ifndef MMPC_TYPES_HPP_
#define MMPC_TYPES_HPP_

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mmpc {

/// End-effector pose: x, y, z [m], roll, pitch, yaw [rad] (ZYX intrinsic).
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Raised on invalid configuration or malformed inputs (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a numerical routine produces non-finite values (exit code 2).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised on file read/write failures (exit code 3).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mmpc

#endif  // MMPC_TYPES_HPP_
