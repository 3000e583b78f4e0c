#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vidprnu {

/// Failure categories reported by the library. The CLI maps Config to the
/// usage exit code and every other kind to the data-error code.
enum class ErrorKind {
  Parse,        // malformed XML
  Format,       // well-formed input with bad content (tokens, file formats)
  Bounds,       // coordinates or grid outside the declared frame
  Gap,          // missing index in a frame sequence
  Resolution,   // mixed frame sizes
  Alignment,    // frame / coefficient-dump count mismatch
  Size,         // input too small for the requested operation
  Shape,        // dimension or length mismatch between operands
  EmptyVideo,
  State,        // operation not valid for the object's current state
  Degenerate,   // constant vector, zero norm
  Matrix,       // malformed similarity matrix
  Range,        // argument outside its valid range
  TooFewItems,
  Label,        // id missing from ground truth
  DegenerateLabels,
  Io,
  Id,           // manifest / fingerprint id mismatch
  Config,       // invalid parameters
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

}  // namespace vidprnu
