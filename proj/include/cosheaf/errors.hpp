#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace cosheaf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RingMismatchError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// A matrix that does not carry the domain relations into the codomain relations.
class WellDefinednessError : public Error {
 public:
  WellDefinednessError(std::string what, std::size_t relation_row)
      : Error(std::move(what)), relation_row_(relation_row) {}
  std::size_t relation_row() const noexcept { return relation_row_; }

 private:
  std::size_t relation_row_;
};

// f_out * f_in is not zero; the witness is a generator of the source of f_in.
class CompositeNonzeroError : public Error {
 public:
  CompositeNonzeroError(std::string what, std::size_t generator)
      : Error(std::move(what)), generator_(generator) {}
  std::size_t generator() const noexcept { return generator_; }

 private:
  std::size_t generator_;
};

class CategoryError : public Error {
 public:
  CategoryError(std::string what, std::string witness = {})
      : Error(std::move(what)), witness_(std::move(witness)) {}
  const std::string& witness() const noexcept { return witness_; }

 private:
  std::string witness_;
};

class SiteAxiomError : public Error {
 public:
  SiteAxiomError(std::string axiom, std::string witness)
      : Error("site axiom " + axiom + " fails: " + witness),
        axiom_(std::move(axiom)),
        witness_(std::move(witness)) {}
  const std::string& axiom() const noexcept { return axiom_; }
  const std::string& witness() const noexcept { return witness_; }

 private:
  std::string axiom_;
  std::string witness_;
};

class MismatchError : public Error {
 public:
  using Error::Error;
};

class MissingPullbackError : public Error {
 public:
  using Error::Error;
};

class PretopologyRequiredError : public Error {
 public:
  using Error::Error;
};

class PosetRequiredError : public Error {
 public:
  using Error::Error;
};

class NotACosheafError : public Error {
 public:
  using Error::Error;
};

class NonAdditiveFunctorError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string what, std::size_t line = 0, std::size_t column = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"
                   : what),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace cosheaf
