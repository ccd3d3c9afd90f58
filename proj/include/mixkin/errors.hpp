#pragma once

#include <stdexcept>
#include <string>

namespace mixkin {

// Exit codes used by the CLI; library errors map onto these.
enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitConvergence = 3,
    kExitInternal = 4,
};

// Bad or inconsistent input data (files, config, profiles).
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Optimizer failed to reach a usable optimum.
class ConvergenceError : public std::runtime_error {
  public:
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computed quantity violated an internal invariant.
class InternalError : public std::logic_error {
  public:
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace mixkin
