#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "webradio/error.hpp"

namespace webradio {

inline constexpr int kPresetSlots = 10;

namespace cmd {
struct list {
  bool operator==(const list&) const = default;
};
struct prev {
  bool operator==(const prev&) const = default;
};
struct next {
  bool operator==(const next&) const = default;
};
struct select {
  int slot = 0;
  bool operator==(const select&) const = default;
};
struct set {
  int slot = 0;
  std::string url;
  bool operator==(const set&) const = default;
};
struct remove {
  int slot = 0;
  std::optional<std::string> url;  // accepted, never used to match
  bool operator==(const remove&) const = default;
};
}  // namespace cmd

using command = std::variant<cmd::list, cmd::prev, cmd::next, cmd::select, cmd::set, cmd::remove>;

std::string percent_decode(std::string_view in);

// http:// or https:// followed by a non-empty host, no whitespace or control bytes.
bool is_station_url(std::string_view url);

// Grammar at the server root:
//   /          list
//   /P  /N     previous / next station
//   /d         select slot d (0-9)
//   /d+URL     set slot d (split at the first '+')
//   /d-[URL]   remove slot d
// Percent-escapes are decoded before matching. Throws error(unknown_command)
// or error(bad_url).
command parse_command(std::string_view path);

// Inverse of parse_command; '%' and unsafe bytes are escaped so that
// parse_command(render_command(c)) == c.
std::string render_command(const command& c);

std::string_view command_name(const command& c);

struct preset_store {
  std::array<std::optional<std::string>, kPresetSlots> slots;
  int current = 0;

  bool empty() const;
  // Throws error(format) if any invariant is broken.
  void validate() const;
  bool operator==(const preset_store&) const = default;
};

struct command_response {
  enum class status_kind { ok, error };

  status_kind status = status_kind::ok;
  std::optional<errc> error_code;
  std::string body;
  std::optional<int> station_changed;

  bool ok() const { return status == status_kind::ok; }
};

// One line per non-empty slot: "<marker><slot> <url>", marker '*' on the
// current slot, ' ' otherwise.
std::string render_listing(const preset_store& store);

// On failure the returned store is the input unchanged and the response
// carries the error.
std::pair<preset_store, command_response> apply(preset_store store, const command& c);

// "d<TAB>url\n" per non-empty slot then "current<TAB>d\n".
std::string save_store(const preset_store& store);
// Throws parse_error(format) on malformed input.
preset_store load_store(std::string_view bytes);

}  // namespace webradio
