#pragma once

#include <stdexcept>
#include <string>

namespace tablerl {

// Root of the library's error hierarchy. Callers that only want one catch
// clause can catch tablerl::Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidTable : public Error {
 public:
  using Error::Error;
};

// pre_rendered table asked to render in a format other than its declared tag.
class FormatMismatch : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& what)
      : Error("parse error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class GoldTaskMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyReference : public Error {
 public:
  using Error::Error;
};

class GroupTooSmall : public Error {
 public:
  using Error::Error;
};

// Raised only in skip_group mode: every reward in the group is identical, so
// the group carries no learning signal.
class DegenerateGroup : public Error {
 public:
  using Error::Error;
};

class MissingAdvantages : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  SchemaError(int line, const std::string& field, const std::string& message)
      : Error("schema error at line " + std::to_string(line) + ", field '" +
              field + "': " + message),
        line_(line),
        field_(field),
        message_(message) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }
  // The diagnostic without the line/field prefix, for re-wrapping.
  const std::string& message() const { return message_; }

 private:
  int line_;
  std::string field_;
  std::string message_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UnknownInstance : public Error {
 public:
  using Error::Error;
};

class JudgeUnavailable : public Error {
 public:
  using Error::Error;
};

class BadCounts : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class BadConfig : public Error {
 public:
  using Error::Error;
};

}  // namespace tablerl
