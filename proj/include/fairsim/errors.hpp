#pragma once

#include <stdexcept>
#include <string>

namespace fairsim {

/// Unknown (effort, group) cell, bad parameter set, inconsistent grid.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Density estimation failed (empty cell, degenerate bandwidth, ...).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Likelihood ratio requested where both densities vanish.
class UndefinedRatioError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested operating point lies outside the feasible region.
class InfeasibleTargetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; message carries the offending line number.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear-algebra failure (singular system and similar).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fairsim
