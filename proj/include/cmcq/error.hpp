#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cmcq {

// Base of every error raised by the library. The CLI maps these to exit 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

#define CMCQ_DEFINE_ERROR(Name)      \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

CMCQ_DEFINE_ERROR(DuplicateName);
CMCQ_DEFINE_ERROR(UnboundReturnVariable);
CMCQ_DEFINE_ERROR(EmptyReturn);
CMCQ_DEFINE_ERROR(IoError);
CMCQ_DEFINE_ERROR(RaggedRow);
CMCQ_DEFINE_ERROR(EmptyHeader);
CMCQ_DEFINE_ERROR(MalformedDocument);
CMCQ_DEFINE_ERROR(UnknownAttribute);
CMCQ_DEFINE_ERROR(NotCanonical);
CMCQ_DEFINE_ERROR(NotDescendant);
CMCQ_DEFINE_ERROR(UnsupportedKind);
CMCQ_DEFINE_ERROR(ArityMismatch);
CMCQ_DEFINE_ERROR(TooFewClauses);
CMCQ_DEFINE_ERROR(MissingSource);

#undef CMCQ_DEFINE_ERROR

// Raised when an internal consistency audit fails. Never expected; the CLI
// maps it to exit 2.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cmcq
