#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace webradio {

inline constexpr std::size_t kScrollGap = 3;
inline constexpr std::size_t kDefaultDisplayWidth = 16;

struct display_line {
  std::string content;  // printable ASCII only
  std::size_t offset = 0;

  bool operator==(const display_line&) const = default;
};

// Three-line character display. Lines wider than `width` scroll leftward one
// character per tick, followed by a 3-space gap before wrapping.
struct display_model {
  std::array<display_line, 3> lines;
  std::size_t width = kDefaultDisplayWidth;

  // Replaces line content; resets the scroll offset only when the text changed.
  void set_line(std::size_t index, std::string_view text);
  std::array<std::string, 3> render() const;

  bool operator==(const display_model&) const = default;
};

// Exactly `width` characters, space padded.
std::string render_line(const display_line& line, std::size_t width);

display_model display_tick(display_model model);

}  // namespace webradio
