#include "vidprnu/xml.hpp"

#include <charconv>
#include <string>

#include "vidprnu/error.hpp"

namespace vidprnu::xml {

std::optional<std::string_view> Element::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes)
    if (k == key) return std::string_view(v);
  return std::nullopt;
}

const Element* Element::child(std::string_view child_name) const {
  for (const auto& c : children)
    if (c.name == child_name) return &c;
  return nullptr;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_name_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  std::vector<Element> document() {
    std::vector<Element> roots;
    skip_misc();
    while (pos_ < src_.size()) {
      if (src_[pos_] != '<') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] != '<') ++pos_;
        // Stray character data between top-level elements is only allowed if blank.
        for (std::size_t i = start; i < pos_; ++i)
          if (!is_space(src_[i])) fail(i, "character data outside of any element");
        continue;
      }
      roots.push_back(element());
      skip_misc();
    }
    return roots;
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& what) const {
    throw Error(ErrorKind::Parse, "coeffxml", what + " at byte " + std::to_string(at));
  }

  bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void skip_space() {
    while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
  }

  void skip_until(std::string_view terminator, std::string_view what) {
    std::size_t start = pos_;
    std::size_t end = src_.find(terminator, pos_);
    if (end == std::string_view::npos) fail(start, "unterminated " + std::string(what));
    pos_ = end + terminator.size();
  }

  // Whitespace, comments, processing instructions and DOCTYPE between elements.
  void skip_misc() {
    for (;;) {
      skip_space();
      if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<!DOCTYPE")) {
        skip_until(">", "DOCTYPE");
      } else {
        return;
      }
    }
  }

  std::string name() {
    std::size_t start = pos_;
    if (pos_ >= src_.size() || !is_name_start(src_[pos_])) fail(pos_, "expected a name");
    while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  void decode_into(std::string& out, std::string_view raw, std::size_t base) const {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out += raw[i];
        continue;
      }
      std::size_t semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail(base + i, "unterminated entity reference");
      std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "amp") out += '&';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (ent.size() > 1 && ent[0] == '#') {
        int radix = 10;
        std::string_view digits = ent.substr(1);
        if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
          radix = 16;
          digits = digits.substr(1);
        }
        unsigned long cp = 0;
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, radix);
        if (ec != std::errc{} || p != digits.data() + digits.size() || cp > 0x10FFFF)
          fail(base + i, "invalid character reference");
        append_utf8(out, cp);
      } else {
        fail(base + i, "unknown entity '" + std::string(ent) + "'");
      }
      i = semi;
    }
  }

  Element element() {
    Element el;
    el.offset = pos_;
    ++pos_;  // '<'
    el.name = name();
    for (;;) {
      bool had_space = pos_ < src_.size() && is_space(src_[pos_]);
      skip_space();
      if (pos_ >= src_.size()) fail(el.offset, "unterminated start tag <" + el.name + ">");
      if (starts_with("/>")) {
        pos_ += 2;
        return el;
      }
      if (src_[pos_] == '>') {
        ++pos_;
        break;
      }
      if (!had_space) fail(pos_, "expected whitespace before attribute");
      std::string key = name();
      skip_space();
      if (pos_ >= src_.size() || src_[pos_] != '=') fail(pos_, "expected '=' after attribute name");
      ++pos_;
      skip_space();
      if (pos_ >= src_.size() || (src_[pos_] != '"' && src_[pos_] != '\''))
        fail(pos_, "expected quoted attribute value");
      char quote = src_[pos_++];
      std::size_t vstart = pos_;
      std::size_t vend = src_.find(quote, pos_);
      if (vend == std::string_view::npos) fail(vstart - 1, "unterminated attribute value");
      std::string_view raw = src_.substr(vstart, vend - vstart);
      if (raw.find('<') != std::string_view::npos) fail(vstart, "'<' in attribute value");
      std::string value;
      decode_into(value, raw, vstart);
      if (el.attribute(key)) fail(vstart, "duplicate attribute '" + key + "'");
      el.attributes.emplace_back(std::move(key), std::move(value));
      pos_ = vend + 1;
    }

    // Content.
    for (;;) {
      if (pos_ >= src_.size()) fail(el.offset, "unclosed element <" + el.name + ">");
      if (starts_with("</")) {
        std::size_t close_at = pos_;
        pos_ += 2;
        std::string closing = name();
        skip_space();
        if (pos_ >= src_.size() || src_[pos_] != '>') fail(pos_, "expected '>' in end tag");
        ++pos_;
        if (closing != el.name)
          fail(close_at, "mismatched end tag </" + closing + "> for <" + el.name + ">");
        return el;
      }
      if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<![CDATA[")) {
        std::size_t start = pos_ + 9;
        skip_until("]]>", "CDATA section");
        el.text.append(src_.substr(start, pos_ - 3 - start));
      } else if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (src_[pos_] == '<') {
        el.children.push_back(element());
      } else {
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] != '<') ++pos_;
        decode_into(el.text, src_.substr(start, pos_ - start), start);
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<Element> parse(std::string_view source) {
  // Skip a UTF-8 byte order mark.
  if (source.substr(0, 3) == "\xEF\xBB\xBF") {
    auto roots = Parser(source.substr(3)).document();
    return roots;
  }
  return Parser(source).document();
}

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace vidprnu::xml
