#pragma once
// Error types raised by the selection engine.
//
// Every error carries a category so the CLI can map it onto an exit code:
// validation problems exit with 2, I/O problems with 3.

#include <stdexcept>
#include <string>

namespace clipal {

enum class ErrorCategory { validation, io };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorCategory::validation, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

class MalformedProbabilities : public ValidationError {
public:
    MalformedProbabilities(std::size_t index, double sum, const std::string& what)
        : ValidationError(what), index_(index), sum_(sum) {}

    // Index of the first entry outside [0,1], or the vector size when only the sum is off.
    std::size_t index() const noexcept { return index_; }
    double sum() const noexcept { return sum_; }

private:
    std::size_t index_;
    double sum_;
};

#define CLIPAL_DECLARE_ERROR(Name, Base)                                      \
    class Name : public Base {                                                \
    public:                                                                   \
        explicit Name(const std::string& what) : Base(#Name ": " + what) {}   \
    }

CLIPAL_DECLARE_ERROR(InvariantViolation, ValidationError);
CLIPAL_DECLARE_ERROR(EmptyPool, ValidationError);
CLIPAL_DECLARE_ERROR(SchemaError, ValidationError);
CLIPAL_DECLARE_ERROR(ParseError, ValidationError);
CLIPAL_DECLARE_ERROR(DifferentVideo, ValidationError);
CLIPAL_DECLARE_ERROR(MissingEmbeddings, ValidationError);
CLIPAL_DECLARE_ERROR(DimensionMismatch, ValidationError);
CLIPAL_DECLARE_ERROR(BudgetTooSmall, ValidationError);
CLIPAL_DECLARE_ERROR(ConfigError, ValidationError);
CLIPAL_DECLARE_ERROR(MissingBackward, ValidationError);

#undef CLIPAL_DECLARE_ERROR

}  // namespace clipal
