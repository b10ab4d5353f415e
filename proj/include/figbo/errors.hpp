#ifndef FIGBO_ERRORS_HPP
#define FIGBO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace figbo {

/// Malformed arguments: dimension mismatch, out-of-box input, degenerate box.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Factorization failures and non-finite acquisition surfaces.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid experiment configuration. Carries the offending field name.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace figbo

#endif // FIGBO_ERRORS_HPP
