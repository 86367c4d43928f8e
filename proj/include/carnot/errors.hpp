#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace carnot {

/// Malformed input: dimension mismatch, invalid group spec, bad config value.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Expression evaluated outside its domain (log/sqrt of a negative, division by zero).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Differentiation requested through abs/min/max.
class NonsmoothError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Stencil or window leaves the sampled domain.
class BoundaryError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& what)
        : std::runtime_error("syntax error at offset " + std::to_string(offset) + ": " + what),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

} // namespace carnot
