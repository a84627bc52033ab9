#pragma once

#include <stdexcept>
#include <string>

namespace refill3d {

// File load/save failure. The message names the offending path.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Pose recovery cannot start: target and reference share no usable overlap
// at the coarsest pyramid level.
class AlignmentFailedError : public std::runtime_error {
 public:
  explicit AlignmentFailedError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace refill3d
