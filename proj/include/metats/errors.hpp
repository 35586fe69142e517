#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace metats {

/// Base of every error thrown by the library. `name()` is the stable error
/// identifier printed by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define METATS_DEFINE_ERROR(Type)                                                    \
    class Type : public Error {                                                      \
    public:                                                                          \
        explicit Type(const std::string& what) : Error(#Type, what) {}               \
    }

METATS_DEFINE_ERROR(NotPositiveDefinite);
METATS_DEFINE_ERROR(DimensionMismatch);
METATS_DEFINE_ERROR(UnsupportedLength);
METATS_DEFINE_ERROR(EmptyInput);
METATS_DEFINE_ERROR(InvalidVariance);
METATS_DEFINE_ERROR(IndexOutOfRange);
METATS_DEFINE_ERROR(InvalidInput);
METATS_DEFINE_ERROR(ValidationError);
METATS_DEFINE_ERROR(IoError);

#undef METATS_DEFINE_ERROR

/// Config parse failure with the offending position.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : Error("ParseError", "line " + std::to_string(line) + ", column " +
                                  std::to_string(column) + ": " + what),
          line_(line), column_(column) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// ValidationError that remembers which config field was rejected.
class FieldError : public ValidationError {
public:
    FieldError(std::string field, const std::string& why)
        : ValidationError("invalid value for \"" + field + "\": " + why), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace metats
