#include "vidprnu/error.hpp"

#include <utility>

namespace vidprnu {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Bounds: return "bounds error";
    case ErrorKind::Gap: return "gap error";
    case ErrorKind::Resolution: return "resolution error";
    case ErrorKind::Alignment: return "alignment error";
    case ErrorKind::Size: return "size error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::EmptyVideo: return "empty-video error";
    case ErrorKind::State: return "state error";
    case ErrorKind::Degenerate: return "degenerate-input error";
    case ErrorKind::Matrix: return "matrix error";
    case ErrorKind::Range: return "range error";
    case ErrorKind::TooFewItems: return "too-few-items error";
    case ErrorKind::Label: return "label error";
    case ErrorKind::DegenerateLabels: return "degenerate-labels error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Id: return "id error";
    case ErrorKind::Config: return "config error";
  }
  return "error";
}

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error(module + ": " + std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      module_(std::move(module)) {}

}  // namespace vidprnu
