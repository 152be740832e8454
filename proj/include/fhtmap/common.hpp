#pragma once

#include <stdexcept>
#include <string>

namespace fhtmap {

/// Malformed input file (world text, map json, config).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration values (e.g. gamma2 >= gamma1).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fhtmap
