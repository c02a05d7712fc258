#pragma once

#include <stdexcept>
#include <string>

namespace wncs {

/// A rational function was evaluated at (or numerically on top of) a pole.
class EvaluationAtPole : public std::domain_error {
public:
    explicit EvaluationAtPole(const std::string& what) : std::domain_error(what) {}
};

/// An iterative numerical procedure failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A bracketing search found no sign change / crossing in the requested range.
class NoCrossing : public std::runtime_error {
public:
    explicit NoCrossing(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wncs
