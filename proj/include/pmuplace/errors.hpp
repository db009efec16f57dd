#pragma once

#include <stdexcept>
#include <string>

namespace pmuplace {

// Bad input data: unreadable files, malformed case text, cache mismatches.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Syntax error while parsing a case file; carries the position.
class ParseError : public DataError {
public:
  ParseError(const std::string& msg, int line, int column)
      : DataError(msg + " (line " + std::to_string(line) + ", column " +
                  std::to_string(column) + ")"),
        line(line),
        column(column) {}
  int line;
  int column;
};

// Invalid experiment configuration (unknown key, bad value, missing path).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: power flow divergence where convergence was required,
// solver line-search breakdown, non-finite objective.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pmuplace
