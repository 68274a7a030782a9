#pragma once

#include <stdexcept>
#include <string>

namespace tensorconc {

/// Requested computation is outside the supported regime (size caps,
/// unsupported dimension/family combinations). Callers that have a
/// fallback route catch this type.
class unsupported_error : public std::runtime_error {
public:
  explicit unsupported_error(const std::string& what) : std::runtime_error(what) {}
};

/// A moment or Orlicz norm does not exist for the requested parameters.
class moment_error : public std::domain_error {
public:
  explicit moment_error(const std::string& what) : std::domain_error(what) {}
};

}  // namespace tensorconc
