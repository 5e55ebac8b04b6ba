#pragma once

#include <stdexcept>
#include <string>

namespace corp {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Non-finite data, malformed matrix text or similar input defects.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative kernel hit its iteration cap.
class NumericalFailure : public Error {
public:
    NumericalFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A linear (Sylvester-type) equation has no unique solution.
class SingularEquation : public Error {
public:
    using Error::Error;
};

/// Some eigenvalue of H has non-positive real part.
class RootConditionError : public Error {
public:
    using Error::Error;
};

/// The output half of the regulator equations cannot be met.
class RegulationInfeasible : public Error {
public:
    using Error::Error;
};

/// Gain synthesis failed (uncontrollable/unstabilizable pair or Riccati stall).
class SynthesisError : public Error {
public:
    using Error::Error;
};

/// A failure attributed to one agent of the network (0-based index).
class AgentError : public Error {
public:
    AgentError(std::size_t agent, const std::string& what)
        : Error("agent " + std::to_string(agent + 1) + ": " + what), agent_(agent) {}
    [[nodiscard]] std::size_t agent() const noexcept { return agent_; }

private:
    std::size_t agent_;
};

/// sigma(M exp(F h)) and sigma(exp(S h)) overlap, so the hold manifold is not unique.
class SeparationError : public Error {
public:
    using Error::Error;
};

/// Malformed scenario configuration; carries the 1-based line number (0 when unknown).
class ConfigError : public Error {
public:
    ConfigError(std::size_t line, const std::string& what)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace corp
