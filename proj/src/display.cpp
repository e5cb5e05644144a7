#include "webradio/display.hpp"

#include "webradio/error.hpp"

namespace webradio {

void display_model::set_line(std::size_t index, std::string_view text) {
  if (index >= lines.size()) throw error(errc::index, "display has three lines");
  std::string clean;
  clean.reserve(text.size());
  // the panel font is ASCII; everything else becomes '?'
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    clean += (c >= 0x20 && c < 0x7f) ? ch : '?';
  }
  if (clean == lines[index].content) return;
  lines[index].content = std::move(clean);
  lines[index].offset = 0;
}

std::array<std::string, 3> display_model::render() const {
  return {render_line(lines[0], width), render_line(lines[1], width), render_line(lines[2], width)};
}

std::string render_line(const display_line& line, std::size_t width) {
  const std::string& text = line.content;
  if (text.size() <= width) {
    std::string out = text;
    out.resize(width, ' ');
    return out;
  }
  std::size_t period = text.size() + kScrollGap;
  std::string out;
  out.reserve(width);
  for (std::size_t i = 0; i < width; ++i) {
    std::size_t pos = (line.offset + i) % period;
    out += pos < text.size() ? text[pos] : ' ';
  }
  return out;
}

display_model display_tick(display_model model) {
  for (auto& line : model.lines) {
    if (line.content.size() <= model.width) {
      line.offset = 0;
      continue;
    }
    line.offset = (line.offset + 1) % (line.content.size() + kScrollGap);
  }
  return model;
}

}  // namespace webradio
