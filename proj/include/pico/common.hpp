#pragma once

#include <Eigen/Dense>

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pico {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Face = std::array<int, 3>;

constexpr double kPi = std::numbers::pi;

enum class ErrorKind {
  NonManifold,
  DegenerateFace,
  TracingStuck,
  Disconnected,
  DegeneratePatch,
  DegenerateDirection,
  DimensionMismatch,
  UnknownPart,
  OpenMesh,
  BehindCamera,
  EmptyCorrespondences,
  DegenerateCorrespondences,
  NonFiniteLoss,
  EmptyChains,
  EmptyStore,
  MissingCannedEntry,
  MalformedAnswer,
  DegenerateConfiguration,
  ParseError,
  SchemaVersionUnsupported,
  InvalidArgument,
  IoError,
  NotFound,
  Conflict,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace pico
