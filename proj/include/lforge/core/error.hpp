#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lforge {

// Base of every error thrown by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text: TSV cells, SMILES, PDB records, JSON schemas.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

// Well-formed input that violates a documented constraint.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An operation filtered everything away.
class EmptyResultError : public Error {
 public:
  using Error::Error;
};

// Chemistry that cannot be made consistent (valence, kekulization).
class SanitizeError : public Error {
 public:
  SanitizeError(const std::string& what, std::ptrdiff_t atom = -1)
      : Error(atom >= 0 ? what + " (atom " + std::to_string(atom) + ")" : what), atom_(atom) {}
  std::ptrdiff_t atom() const noexcept { return atom_; }

 private:
  std::ptrdiff_t atom_;
};

// Structure download failed; carries the accession so callers can flag it.
class FetchError : public Error {
 public:
  FetchError(std::string accession, const std::string& what)
      : Error(what), accession_(std::move(accession)) {}
  const std::string& accession() const noexcept { return accession_; }

 private:
  std::string accession_;
};

// The evolutionary run could not assemble a starting population.
class InitializationError : public Error {
 public:
  using Error::Error;
};

}  // namespace lforge
