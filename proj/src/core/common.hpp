#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace surfsup {

inline constexpr const char* kVersion = "0.1.0";

using Real = double;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using FaceMat = Eigen::Matrix<int, Eigen::Dynamic, 3>;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

enum class ErrorCode {
  invalid_argument,
  capacity,
  geometry,
  assembly,
  solver,
  rank_deficient,
  io,
  config,
  internal,
};

/// All core routines report failure by throwing Error; the C API layer maps
/// the code to a status enum and keeps the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace surfsup
