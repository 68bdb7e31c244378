#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace topiclab {

// Base for everything thrown on purpose; the CLI catches this to map
// failures onto exit codes without swallowing genuine bugs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// input validation (bad sizes, k > n, zero dimensions, ...)
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// malformed files: JSONL syntax, truncated binaries, bad CSV rows
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(what), line(line) {}
  std::size_t line;  // 1-based; 0 when not line-addressable
};

// embeddings present for ids the corpus lacks, or vice versa
class IdMismatch : public Error {
 public:
  IdMismatch(const std::string& what, std::vector<std::string> missing)
      : Error(what), missing_ids(std::move(missing)) {}
  std::vector<std::string> missing_ids;
};

// experiment spec problems (unknown key, wrong type, missing field)
class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace topiclab
