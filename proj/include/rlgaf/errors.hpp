#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rlgaf {

// Base for all library errors. `kind()` is a stable machine-readable tag;
// the CLI prints it as "error[<kind>]: <message>".
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& message)
      : Error("invalid-input", message) {}
};

class InvalidTokenError : public Error {
 public:
  explicit InvalidTokenError(const std::string& message)
      : Error("invalid-token", message) {}
};

// Malformed computation graph (e.g. backward from a non-scalar node).
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& message)
      : Error("structural", message) {}
};

// A caller-supplied callable violated its contract (e.g. a function that was
// required to be deterministic returned two different values).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& message)
      : Error("contract", message) {}
};

// Non-finite gradients/parameters or a tripped magnitude guard. Aborts the run
// with a diagnostic instead of training silently on garbage.
class TrainingDivergenceError : public Error {
 public:
  explicit TrainingDivergenceError(const std::string& message)
      : Error("training-divergence", message) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, long line = 0)
      : Error("parse", line > 0 ? "line " + std::to_string(line) + ": " + message
                                : message),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class IncompletePairError : public Error {
 public:
  IncompletePairError(const std::string& message, std::vector<std::string> missing)
      : Error("incomplete-pair", message), missing_(std::move(missing)) {}
  const std::vector<std::string>& missing_prompt_ids() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message)
      : Error("transport", message) {}
};

class UnparseableReplyError : public Error {
 public:
  explicit UnparseableReplyError(const std::string& message, std::string raw_text)
      : Error("unparseable-reply", message), raw_text_(std::move(raw_text)) {}
  const std::string& raw_text() const { return raw_text_; }

 private:
  std::string raw_text_;
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error("format", message) {}
};

}  // namespace rlgaf
