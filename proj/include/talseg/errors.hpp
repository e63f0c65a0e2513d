#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace talseg {

// Base for all toolkit failures; CLI maps these to exit code 1.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration (flags, config file, or script parameters).
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Malformed input record. Carries the 1-based line number of the offending line.
class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

}  // namespace talseg
