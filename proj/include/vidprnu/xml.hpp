#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vidprnu::xml {

/// Element node of a parsed document. Character data of mixed content is
/// concatenated into `text`; comments and processing instructions are dropped.
struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;
  std::vector<Element> children;
  std::size_t offset = 0;  // byte offset of the opening '<'

  std::optional<std::string_view> attribute(std::string_view key) const;
  const Element* child(std::string_view child_name) const;
};

/// Parses a UTF-8 document. More than one top-level element is accepted so
/// fragments such as a bare sequence of <Picture> elements parse as-is.
/// Throws Error(ErrorKind::Parse) carrying the byte offset of the problem.
std::vector<Element> parse(std::string_view source);

/// Escapes the five predefined entities.
std::string escape(std::string_view text);

}  // namespace vidprnu::xml
