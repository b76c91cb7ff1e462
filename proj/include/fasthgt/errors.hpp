#pragma once

#include <stdexcept>
#include <string>

namespace fasthgt {

// Invalid user-supplied values or malformed data (CLI exit code 2).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// File / stream problems (CLI exit code 4).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed textual input; `offset` is a 0-based byte position when known.
struct ParseError : ValidationError {
    std::size_t offset;
    ParseError(const std::string& what, std::size_t off)
        : ValidationError(what + " (at byte " + std::to_string(off) + ")"), offset(off) {}
};

}  // namespace fasthgt
