#pragma once

#include <stdexcept>
#include <string>

namespace oscillab {

enum class ErrorKind {
  InvalidRegion,
  InvalidLayer,
  InvalidParameter,
  ParameterRange,
  Domain,
  EmptyDomain,
  Construction,
  Convergence,
  Config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace oscillab
