#include "stablesep/error.hpp"

namespace stablesep {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConstantColumn: return "ConstantColumn";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::SelectionCollapse: return "SelectionCollapse";
    case ErrorKind::TooFewEnvironments: return "TooFewEnvironments";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::EmptyGroup: return "EmptyGroup";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

bool is_configuration_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::IndexOutOfRange:
    case ErrorKind::KTooLarge:
    case ErrorKind::MissingColumn:
    case ErrorKind::EmptyGroup:
    case ErrorKind::ParseError:
    case ErrorKind::ConfigError:
      return true;
    default:
      return false;
  }
}

}  // namespace stablesep
