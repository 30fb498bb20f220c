#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace welltest {

/// Precondition violation on a public entry point.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine produced a non-finite value or a degenerate system.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public std::runtime_error {
public:
    ParseError(std::string file, std::size_t row, std::size_t column, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(row) + ":" + std::to_string(column) + ": " + what),
          file_(std::move(file)), row_(row), column_(column) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::string file_;
    std::size_t row_;
    std::size_t column_;
};

}  // namespace welltest
