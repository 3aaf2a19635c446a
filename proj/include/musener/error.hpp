#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace musener {

// Raised for malformed or inconsistent input data (files, corpora, models).
// The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// DataError carrying the 1-based line number and source name of the
// offending input line.
class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& msg)
      : DataError(source + ":" + std::to_string(line) + ": " + msg),
        source_(source),
        line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

}  // namespace musener
