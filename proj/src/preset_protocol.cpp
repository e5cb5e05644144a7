#include "webradio/preset_protocol.hpp"

#include <algorithm>
#include <charconv>
#include <vector>

namespace webradio {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char a = s[i];
    if (a >= 'A' && a <= 'Z') a = static_cast<char>(a - 'A' + 'a');
    if (a != prefix[i]) return false;
  }
  return true;
}

[[noreturn]] void unknown(std::string_view path) {
  throw error(errc::unknown_command, "unknown command: " + std::string(path));
}

std::string escape_for_path(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (c <= 0x20 || c >= 0x7f || c == '%' || c == '#') {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xf];
    } else {
      out += ch;
    }
  }
  return out;
}

// Next non-empty slot strictly after `from` walking in `step` direction,
// wrapping; may return `from` itself when it is the only filled slot.
std::optional<int> step_filled(const preset_store& store, int from, int step) {
  for (int k = 1; k <= kPresetSlots; ++k) {
    int slot = ((from + step * k) % kPresetSlots + kPresetSlots) % kPresetSlots;
    if (store.slots[slot]) return slot;
  }
  return std::nullopt;
}

command_response failure(errc code, std::string message) {
  command_response r;
  r.status = command_response::status_kind::error;
  r.error_code = code;
  r.body = std::move(message);
  return r;
}

}  // namespace

std::string percent_decode(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == '%' && i + 2 < in.size() && hex_value(in[i + 1]) >= 0 && hex_value(in[i + 2]) >= 0) {
      out += static_cast<char>(hex_value(in[i + 1]) * 16 + hex_value(in[i + 2]));
      i += 2;
    } else {
      out += in[i];
    }
  }
  return out;
}

bool is_station_url(std::string_view url) {
  std::string_view rest;
  if (starts_with_ci(url, "http://")) {
    rest = url.substr(7);
  } else if (starts_with_ci(url, "https://")) {
    rest = url.substr(8);
  } else {
    return false;
  }
  for (char ch : url) {
    auto c = static_cast<unsigned char>(ch);
    if (c <= 0x20 || c == 0x7f) return false;
  }
  auto host_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, host_end);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  return !authority.empty() && authority.front() != ':';
}

command parse_command(std::string_view raw_path) {
  std::string decoded = percent_decode(raw_path);
  std::string_view path = decoded;
  if (path.empty() || path.front() != '/') unknown(raw_path);
  path.remove_prefix(1);

  if (path.empty()) return cmd::list{};
  if (path == "P") return cmd::prev{};
  if (path == "N") return cmd::next{};
  if (!is_digit(path.front())) unknown(raw_path);

  int slot = path.front() - '0';
  std::string_view rest = path.substr(1);
  if (rest.empty()) return cmd::select{slot};
  if (rest.front() == '+') {
    std::string url(rest.substr(1));
    if (!is_station_url(url)) {
      throw error(errc::bad_url, "not an http(s) URL: \"" + url + "\"");
    }
    return cmd::set{slot, std::move(url)};
  }
  if (rest.front() == '-') {
    std::string_view url = rest.substr(1);
    if (url.empty()) return cmd::remove{slot, std::nullopt};
    return cmd::remove{slot, std::string(url)};
  }
  // multi-digit slots and anything else
  unknown(raw_path);
}

std::string render_command(const command& c) {
  struct visitor {
    std::string operator()(const cmd::list&) const { return "/"; }
    std::string operator()(const cmd::prev&) const { return "/P"; }
    std::string operator()(const cmd::next&) const { return "/N"; }
    std::string operator()(const cmd::select& s) const { return "/" + std::to_string(s.slot); }
    std::string operator()(const cmd::set& s) const {
      return "/" + std::to_string(s.slot) + "+" + escape_for_path(s.url);
    }
    std::string operator()(const cmd::remove& r) const {
      return "/" + std::to_string(r.slot) + "-" + escape_for_path(r.url.value_or(""));
    }
  };
  return std::visit(visitor{}, c);
}

std::string_view command_name(const command& c) {
  static constexpr std::string_view names[] = {"list", "prev", "next", "select", "set", "remove"};
  return names[c.index()];
}

bool preset_store::empty() const {
  return std::none_of(slots.begin(), slots.end(), [](const auto& s) { return s.has_value(); });
}

void preset_store::validate() const {
  if (current < 0 || current >= kPresetSlots) throw error(errc::format, "current slot out of range");
  for (const auto& s : slots) {
    if (s && !is_station_url(*s)) throw error(errc::format, "invalid station URL: " + *s);
  }
}

std::string render_listing(const preset_store& store) {
  std::string out;
  for (int i = 0; i < kPresetSlots; ++i) {
    if (!store.slots[i]) continue;
    out += i == store.current ? '*' : ' ';
    out += std::to_string(i);
    out += ' ';
    out += *store.slots[i];
    out += '\n';
  }
  return out;
}

std::pair<preset_store, command_response> apply(preset_store store, const command& c) {
  command_response resp;

  if (auto* s = std::get_if<cmd::select>(&c)) {
    if (!store.slots[s->slot]) {
      return {std::move(store), failure(errc::empty_slot, "slot " + std::to_string(s->slot) + " is empty")};
    }
    store.current = s->slot;
    resp.station_changed = s->slot;
  } else if (auto* s = std::get_if<cmd::set>(&c)) {
    store.slots[s->slot] = s->url;
  } else if (auto* r = std::get_if<cmd::remove>(&c)) {
    store.slots[r->slot].reset();
    if (store.current == r->slot) {
      if (auto next = step_filled(store, r->slot, +1)) {
        store.current = *next;
        resp.station_changed = *next;
      }
    }
  } else if (std::holds_alternative<cmd::prev>(c) || std::holds_alternative<cmd::next>(c)) {
    int step = std::holds_alternative<cmd::next>(c) ? +1 : -1;
    auto target = step_filled(store, store.current, step);
    if (!target) return {std::move(store), failure(errc::no_stations, "no stations preset")};
    store.current = *target;
    resp.station_changed = *target;
  }

  resp.body = render_listing(store);
  return {std::move(store), std::move(resp)};
}

std::string save_store(const preset_store& store) {
  std::string out;
  for (int i = 0; i < kPresetSlots; ++i) {
    if (!store.slots[i]) continue;
    out += std::to_string(i);
    out += '\t';
    out += *store.slots[i];
    out += '\n';
  }
  out += "current\t" + std::to_string(store.current) + "\n";
  return out;
}

preset_store load_store(std::string_view bytes) {
  preset_store store;
  std::vector<std::string_view> lines;
  while (!bytes.empty()) {
    auto nl = bytes.find('\n');
    if (nl == std::string_view::npos) {
      throw parse_error(errc::format, lines.size() + 1, "missing final line feed");
    }
    lines.push_back(bytes.substr(0, nl));
    bytes.remove_prefix(nl + 1);
  }
  if (lines.empty()) throw parse_error(errc::format, 1, "missing current line");

  auto parse_index = [](std::string_view text, std::size_t line_no) {
    int value = -1;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
      throw parse_error(errc::format, line_no, "expected a slot number");
    }
    if (value < 0 || value >= kPresetSlots) {
      throw parse_error(errc::format, line_no, "slot out of range 0-9");
    }
    return value;
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::size_t line_no = i + 1;
    auto tab = lines[i].find('\t');
    if (tab == std::string_view::npos) throw parse_error(errc::format, line_no, "expected a TAB separator");
    std::string_view key = lines[i].substr(0, tab);
    std::string_view value = lines[i].substr(tab + 1);
    bool last = i + 1 == lines.size();

    if (key == "current") {
      if (!last) throw parse_error(errc::format, line_no, "current must be the final line");
      store.current = parse_index(value, line_no);
      return store;
    }
    if (last) throw parse_error(errc::format, line_no, "missing current line");
    int slot = parse_index(key, line_no);
    if (store.slots[slot]) throw parse_error(errc::format, line_no, "duplicate slot");
    if (!is_station_url(value)) throw parse_error(errc::format, line_no, "invalid station URL");
    store.slots[slot] = std::string(value);
  }
  throw parse_error(errc::format, lines.size(), "missing current line");
}

}  // namespace webradio
