#pragma once

#include <stdexcept>
#include <string>

namespace sdrik {

/// Invalid robot description or joint configuration.
struct ModelError : std::runtime_error {
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Ill-formed optimization program (bad dimensions, bad objective).
struct ProgramError : std::runtime_error {
  explicit ProgramError(const std::string& what) : std::runtime_error(what) {}
};

/// Corrupted numerical state (violated structure constraints, failed recovery).
struct StateError : std::runtime_error {
  explicit StateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sdrik
