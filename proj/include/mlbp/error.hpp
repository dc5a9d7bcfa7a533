#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlbp {

/// Base for all data-dependent failures (bad files, inconsistent datasets).
/// Precondition violations on arguments throw std::invalid_argument instead.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ImageError : public Error {
public:
    enum class Kind { Unreadable, UnsupportedFormat, ZeroDimension, Malformed };

    ImageError(Kind kind, const std::string& path, const std::string& what)
        : Error(path + ": " + what), kind_(kind), path_(path) {}

    Kind kind() const noexcept { return kind_; }
    const std::string& path() const noexcept { return path_; }

private:
    Kind kind_;
    std::string path_;
};

/// Manifest / feature-store / dataset errors. `line` is 1-based, 0 if unknown.
class DataError : public Error {
public:
    explicit DataError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace mlbp
