#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cascade {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Parameters or inputs outside the model's domain (kappa <= 0, tau < 0, ...).
class ParameterDomainError : public Error {
  public:
    using Error::Error;
};

// beta >= alpha - 1 or theta <= 0: the branching factor integral diverges.
class UndefinedBranchingError : public ParameterDomainError {
  public:
    using ParameterDomainError::ParameterDomainError;
};

class NumericIntegrationError : public Error {
  public:
    using Error::Error;
};

class InsufficientDataError : public Error {
  public:
    using Error::Error;
};

class InsufficientEventsError : public Error {
  public:
    using Error::Error;
};

class FitFailureError : public Error {
  public:
    FitFailureError(const std::string& message, std::vector<std::string> diagnostics)
        : Error(message), diagnostics_(std::move(diagnostics)) {}

    const std::vector<std::string>& start_diagnostics() const noexcept { return diagnostics_; }

  private:
    std::vector<std::string> diagnostics_;
};

class SupercriticalPredictionError : public Error {
  public:
    using Error::Error;
};

class InsufficientTrainingError : public Error {
  public:
    using Error::Error;
};

class MissingMetadataError : public Error {
  public:
    MissingMetadataError(const std::string& message, std::size_t event_index)
        : Error(message), event_index_(event_index) {}

    std::size_t event_index() const noexcept { return event_index_; }

  private:
    std::size_t event_index_{0};
};

class ParseError : public Error {
  public:
    ParseError(const std::string& message, std::size_t line)
        : Error(message + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_{0};
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class ModelFormatError : public Error {
  public:
    using Error::Error;
};

class SchemaMismatchError : public Error {
  public:
    using Error::Error;
};

} // namespace cascade
