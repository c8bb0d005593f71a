#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace electroelastic {

using Index = std::int32_t;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VectorX = Eigen::VectorXd;

/// Failure categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
  Validation,       // bad input, violated precondition
  Geometry,         // point location, degenerate cells
  Topology,         // non-manifold interfaces, missing adjacency
  Singularity,      // evaluation at a point charge
  Assembly,         // singular system, factorization failure
  NonConvergence,   // Newton / fixed-point stagnation
  Inadmissible,     // deformation fails the invertibility gate
  Overflow,         // sinh/cosh argument out of range
  Consistency,      // internal invariant violated
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace electroelastic
