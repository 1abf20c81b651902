#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arakelov {

enum class ErrorKind {
  InvalidArgument,
  NonConvergence,
  NotPositiveDefinite,
  RankTooLarge,
  BoundaryAmbiguity,
  NotSaturated,
  GeneratorsDoNotSpan,
  DegenerateMap,
  UnsupportedShape,
  OrbitOverflow,
  OffTorus,
  QuadratureBudgetExceeded,
  IllConditioned,
  NonPositiveCurvature,
  NotEffective,
  NegativeDegree,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace arakelov
