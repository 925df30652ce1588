#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stablesep {

enum class ErrorKind {
  InvalidArgument,
  ConstantColumn,
  IndexOutOfRange,
  DegenerateInput,
  SingularDesign,
  KTooLarge,
  SelectionCollapse,
  TooFewEnvironments,
  MissingColumn,
  EmptyGroup,
  ParseError,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

// Configuration-type failures map to CLI exit code 1, numerical ones to 2.
bool is_configuration_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stablesep
