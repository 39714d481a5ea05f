#pragma once

#include <stdexcept>
#include <string>

namespace cinc {

/// Shape or dimension disagreement between operands.
class shape_error : public std::invalid_argument {
public:
    explicit shape_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or truncated on-disk data (bad magic, version, byte layout).
class format_error : public std::runtime_error {
public:
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid or contradictory configuration.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerically undefined result or non-finite value where one is required.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cinc
