#include "vidprnu/coeffxml.hpp"

#include <charconv>

#include "vidprnu/error.hpp"
#include "vidprnu/io.hpp"
#include "vidprnu/xml.hpp"

namespace vidprnu {

namespace {

constexpr const char* kModule = "coeffxml";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out, 10);
  return ec == std::errc{} && p == s.data() + s.size();
}

[[noreturn]] void format_error(const std::string& what) {
  throw Error(ErrorKind::Format, kModule, what);
}

std::int64_t int_attribute(const xml::Element& el, std::string_view key, const std::string& where) {
  auto value = el.attribute(key);
  if (!value) format_error(where + ": missing attribute '" + std::string(key) + "'");
  std::int64_t out = 0;
  if (!parse_int(*value, out))
    format_error(where + ": attribute " + std::string(key) + "=\"" + std::string(*value) + "\" is not an integer");
  return out;
}

const xml::Element& required_child(const xml::Element& el, std::string_view name, const std::string& where) {
  const xml::Element* c = el.child(name);
  if (!c) format_error(where + ": missing <" + std::string(name) + ">");
  return *c;
}

SliceType parse_slice_type(std::string_view text, const std::string& where) {
  std::string_view s = trim(text);
  if (s.starts_with("SLICE_TYPE_")) s.remove_prefix(11);
  if (s == "I") return SliceType::I;
  if (s == "P") return SliceType::P;
  if (s == "B") return SliceType::B;
  format_error(where + ": illegal slice type '" + std::string(trim(text)) + "'");
}

CoeffMatrix parse_coeffs(const xml::Element& coeffs, const std::string& where) {
  CoeffMatrix m;
  for (const auto& row : coeffs.children) {
    if (row.name != "Row") continue;
    std::vector<std::int32_t> values;
    std::string_view text = row.text;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = text.find(',', start);
      std::string_view token = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      std::int32_t v = 0;
      if (!parse_int(token, v))
        format_error(where + ": Row \"" + std::string(trim(text)) + "\" has non-integer token '" +
                     std::string(trim(token)) + "'");
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (m.rows == 0) {
      m.cols = values.size();
    } else if (values.size() != m.cols) {
      format_error(where + ": ragged coefficient matrix (row " + std::to_string(m.rows) + " has " +
                   std::to_string(values.size()) + " entries, expected " + std::to_string(m.cols) + ")");
    }
    m.values.insert(m.values.end(), values.begin(), values.end());
    ++m.rows;
  }
  if (m.rows == 0) format_error(where + ": <Coeffs> without <Row>");
  return m;
}

void collect_pictures(const xml::Element& el, std::vector<const xml::Element*>& out) {
  if (el.name == "Picture") {
    out.push_back(&el);
    return;
  }
  for (const auto& c : el.children) collect_pictures(c, out);
}

FrameCoeffs parse_picture(const xml::Element& pic, std::size_t width, std::size_t height,
                          const ParseOptions& options) {
  FrameCoeffs frame;
  std::string pic_where = "Picture (byte " + std::to_string(pic.offset) + ")";
  frame.picture_id = int_attribute(pic, "id", pic_where);
  pic_where = "Picture id=" + std::to_string(frame.picture_id);
  frame.poc = int_attribute(pic, "poc", pic_where);
  frame.slice_type = parse_slice_type(required_child(pic, "TypeString", pic_where).text, pic_where);

  for (const auto& mbel : pic.children) {
    if (mbel.name != "MacroBlock") continue;
    MacroblockRecord mb;
    std::string where = pic_where + " MacroBlock (byte " + std::to_string(mbel.offset) + ")";
    mb.index = int_attribute(mbel, "num", where);
    where = pic_where + " MacroBlock num=" + std::to_string(mb.index);

    const auto& pos = required_child(mbel, "Position", where);
    std::int64_t x = 0, y = 0;
    if (!parse_int(required_child(pos, "X", where).text, x) || !parse_int(required_child(pos, "Y", where).text, y))
      format_error(where + ": Position is not an integer pair");
    if (x < 0 || y < 0 || x % 16 != 0 || y % 16 != 0 ||
        static_cast<std::size_t>(x) >= width || static_cast<std::size_t>(y) >= height) {
      throw Error(ErrorKind::Bounds, kModule,
                  where + ": position (" + std::to_string(x) + "," + std::to_string(y) +
                      ") is not a macroblock origin inside " + std::to_string(width) + "x" +
                      std::to_string(height));
    }
    mb.x = static_cast<std::size_t>(x);
    mb.y = static_cast<std::size_t>(y);
    if (const auto* pm = mbel.child("PredModeString")) mb.pred_mode = std::string(trim(pm->text));
    for (const auto& c : mbel.children)
      if (c.name == "Coeffs") mb.coeffs.push_back(parse_coeffs(c, where));
    frame.macroblocks.push_back(std::move(mb));
  }
  std::size_t grid = macroblock_grid_size(width, height);
  if (frame.macroblocks.size() != grid) {
    std::string msg = pic_where + ": " + std::to_string(frame.macroblocks.size()) +
                      " macroblocks, grid of " + std::to_string(width) + "x" + std::to_string(height) +
                      " needs " + std::to_string(grid);
    if (options.strict) throw Error(ErrorKind::Bounds, kModule, msg);
    if (options.warnings) options.warnings->push_back(msg + "; missing blocks treated as dead");
  }
  return frame;
}

}  // namespace

std::string_view to_string(SliceType type) {
  switch (type) {
    case SliceType::I: return "I";
    case SliceType::P: return "P";
    case SliceType::B: return "B";
  }
  return "?";
}

std::size_t macroblock_grid_size(std::size_t width, std::size_t height) {
  return ((width + kMacroblockSize - 1) / kMacroblockSize) * ((height + kMacroblockSize - 1) / kMacroblockSize);
}

std::vector<FrameCoeffs> parse_coeff_dump(std::string_view source, std::size_t expected_width,
                                          std::size_t expected_height, const ParseOptions& options) {
  if (expected_width == 0 || expected_height == 0)
    throw Error(ErrorKind::Config, kModule, "expected frame size must be positive");
  auto roots = xml::parse(source);
  std::vector<const xml::Element*> pictures;
  for (const auto& r : roots) collect_pictures(r, pictures);

  std::vector<FrameCoeffs> frames;
  frames.reserve(pictures.size());
  for (const auto* pic : pictures) frames.push_back(parse_picture(*pic, expected_width, expected_height, options));
  return frames;
}

std::vector<FrameCoeffs> load_coeff_dump(const std::string& path, std::size_t expected_width,
                                         std::size_t expected_height, const ParseOptions& options) {
  return parse_coeff_dump(read_file(path, kModule), expected_width, expected_height, options);
}

std::string serialize_coeff_dump(std::span<const FrameCoeffs> frames) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<Video>\n";
  for (const auto& f : frames) {
    out += "<Picture id=\"" + std::to_string(f.picture_id) + "\" poc=\"" + std::to_string(f.poc) + "\">\n";
    out += "  <TypeString>SLICE_TYPE_";
    out += to_string(f.slice_type);
    out += "</TypeString>\n";
    for (const auto& mb : f.macroblocks) {
      out += "  <MacroBlock num=\"" + std::to_string(mb.index) + "\">\n";
      out += "    <Position>\n      <X>" + std::to_string(mb.x) + "</X>\n      <Y>" + std::to_string(mb.y) +
             "</Y>\n    </Position>\n";
      out += "    <PredModeString>" + xml::escape(mb.pred_mode) + "</PredModeString>\n";
      for (const auto& m : mb.coeffs) {
        out += "    <Coeffs>\n";
        for (std::size_t r = 0; r < m.rows; ++r) {
          out += "      <Row>";
          for (std::size_t c = 0; c < m.cols; ++c) {
            if (c) out += ',';
            out += std::to_string(m.at(r, c));
          }
          out += "</Row>\n";
        }
        out += "    </Coeffs>\n";
      }
      out += "  </MacroBlock>\n";
    }
    out += "</Picture>\n";
  }
  out += "</Video>\n";
  return out;
}

SliceHistogram slice_type_histogram(std::span<const FrameCoeffs> frames) {
  SliceHistogram h;
  for (const auto& f : frames) {
    switch (f.slice_type) {
      case SliceType::I: ++h.i; break;
      case SliceType::P: ++h.p; break;
      case SliceType::B: ++h.b; break;
    }
  }
  return h;
}

}  // namespace vidprnu
