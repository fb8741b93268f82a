#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cellcast {

/// Failure categories; the CLI maps them onto process exit codes.
enum class ErrorCategory {
    Usage,    // bad flags, bad config, invalid arguments (exit 2)
    Data,     // missing or malformed inputs (exit 3)
    Numeric,  // non-finite values, undefined metrics (exit 4)
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string kind, const std::string& what)
        : std::runtime_error(what), category_(category), kind_(std::move(kind)) {}

    ErrorCategory category() const noexcept { return category_; }
    /// Short machine-parsable tag, e.g. "parse_error" or "missing_inputs".
    const std::string& kind() const noexcept { return kind_; }

private:
    ErrorCategory category_;
    std::string kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorCategory::Usage, "usage", what) {}
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ErrorCategory::Data, "parse_error", "line " + std::to_string(line) + ": " + what),
          line_(line),
          detail_(what) {}
    /// Same error, prefixed with the file it came from.
    ParseError(const std::string& source, const ParseError& inner)
        : Error(ErrorCategory::Data, "parse_error", source + ": " + inner.what()),
          line_(inner.line_),
          detail_(inner.detail_) {}
    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what)
        : Error(ErrorCategory::Data, "validation_error", what) {}
};

class MissingInputError : public Error {
public:
    explicit MissingInputError(const std::string& what)
        : Error(ErrorCategory::Data, "missing_inputs", what) {}
};

/// Non-finite activations, losses or gradients.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what)
        : Error(ErrorCategory::Numeric, "numeric_error", what) {}
};

/// Pearson correlation with a zero-variance operand. Kept apart from
/// NumericError: the inputs are fine, the statistic simply does not exist.
class UndefinedCorrelationError : public Error {
public:
    explicit UndefinedCorrelationError(const std::string& what)
        : Error(ErrorCategory::Numeric, "undefined_correlation", what) {}
};

/// A metric with no admissible points (e.g. MAPE where every target is zero).
class UndefinedMetricError : public Error {
public:
    explicit UndefinedMetricError(const std::string& what)
        : Error(ErrorCategory::Numeric, "undefined_metric", what) {}
};

}  // namespace cellcast
