#pragma once

#include <stdexcept>
#include <string>

namespace shuttle {

enum class ErrorCategory { config, degenerate, numerical, domain, contract };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

// Malformed or inconsistent input (config files, invalid coefficient fields).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

// The instance has no attainable optimum or a formula is undefined for it.
class DegenerateInstance : public Error {
public:
    explicit DegenerateInstance(const std::string& what) : Error(ErrorCategory::degenerate, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

// Arguments outside an operation's domain (e.g. x > y for an upward hitting cost).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorCategory::domain, what) {}
};

class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& what) : Error(ErrorCategory::contract, what) {}
};

}  // namespace shuttle
