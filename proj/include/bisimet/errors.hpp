#pragma once

#include <stdexcept>
#include <string>

namespace bisimet {

/// Failure categories raised by the library. Each kind maps onto one of the
/// three process exit codes used by the command line tool: I/O failures exit
/// with 1, validation and parse failures with 2, solver failures with 3.
enum class ErrorKind {
    io_failure,

    // model loading and validation
    json_parse,
    schema,
    validation,
    not_reflexive,
    not_symmetric,
    triangle_violation,
    dimension_mismatch,
    index_out_of_range,

    // transport
    invalid_exponent,
    solver_failure,

    // logic
    syntax,
    unknown_action,
    scalar_out_of_range,
    hypothesis_violated,
    missing_witness,
    empty_formula_set,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Process exit code associated with this failure (1 I/O, 2 validation or
    /// parse, 3 internal solver failure).
    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::io_failure: return 1;
            case ErrorKind::solver_failure: return 3;
            default: return 2;
        }
    }

  private:
    ErrorKind kind_;
};

/// Syntax errors additionally carry the byte offset of the offending token.
class SyntaxError : public Error {
  public:
    SyntaxError(std::size_t position, const std::string& message)
        : Error(ErrorKind::syntax, message), position_(position) {}

    std::size_t position() const noexcept { return position_; }

  private:
    std::size_t position_;
};

}  // namespace bisimet
