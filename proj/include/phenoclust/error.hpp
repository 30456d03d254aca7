#pragma once

#include <stdexcept>
#include <string>

namespace phenoclust {

/// Broad failure class; the CLI maps each to its own exit code.
enum class ErrorCategory { Config, Data, Numerical };

/// Base exception for every library failure. `kind` is a short stable tag
/// ("schema", "ingestion", "divergence", ...) suitable for machine parsing.
class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string kind, const std::string& message);

    ErrorCategory category() const noexcept { return category_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    ErrorCategory category_;
    std::string kind_;
};

class ConfigError : public Error {
public:
    ConfigError(std::string kind, const std::string& message)
        : Error(ErrorCategory::Config, std::move(kind), message) {}
};

class DataError : public Error {
public:
    DataError(std::string kind, const std::string& message)
        : Error(ErrorCategory::Data, std::move(kind), message) {}
};

class NumericalError : public Error {
public:
    NumericalError(std::string kind, const std::string& message)
        : Error(ErrorCategory::Numerical, std::move(kind), message) {}
};

const char* to_string(ErrorCategory category) noexcept;

} // namespace phenoclust
