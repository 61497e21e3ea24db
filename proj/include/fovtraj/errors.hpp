#pragma once

#include <stdexcept>
#include <string>

namespace fovtraj {

/// Malformed scene or data file. The message carries line/field context.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structurally well-formed input that violates a value constraint.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Start or goal is occupied or closer than the hard clearance d_min.
class InfeasibleEndpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The open set was exhausted without reaching the goal cell.
class NoPathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fovtraj
