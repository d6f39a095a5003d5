#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bedseis {

enum class ErrorKind {
    InvalidConfiguration,
    ContractViolation,
    NumericalDegeneracy,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidConfiguration: return "invalid_configuration";
        case ErrorKind::ContractViolation: return "contract_violation";
        case ErrorKind::NumericalDegeneracy: return "numerical_degeneracy";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

/// Base of every error raised by the library. Carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidConfiguration : public Error {
public:
    /// `key` names the offending configuration entry, when there is one.
    explicit InvalidConfiguration(const std::string& what, std::string key = {})
        : Error(ErrorKind::InvalidConfiguration, what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& what) : Error(ErrorKind::ContractViolation, what) {}
};

class NumericalDegeneracy : public Error {
public:
    explicit NumericalDegeneracy(const std::string& what) : Error(ErrorKind::NumericalDegeneracy, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

namespace detail {

inline void require_config(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw InvalidConfiguration(key + ": " + what, key);
}

inline void require_contract(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation(what);
}

}  // namespace detail
}  // namespace bedseis
