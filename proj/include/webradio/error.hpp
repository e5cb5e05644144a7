#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace webradio {

enum class errc {
  parse,
  insufficient_data,
  invalid_argument,
  geometry,
  index,
  no_signal,
  selection_failed,
  unknown_command,
  bad_url,
  empty_slot,
  no_stations,
  format,
  protocol,
  startup,
  config,
};

std::string_view to_string(errc code);

// Every failure raised by this library carries a machine-readable code.
class error : public std::runtime_error {
public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

private:
  errc code_;
};

// Raised by load_pattern_csv / load_store with the 1-based line that failed.
class parse_error : public error {
public:
  parse_error(errc code, std::size_t line, const std::string& what)
      : error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Antenna selection exhausted every retry without seeing the target SSID.
class selection_failed_error : public error {
public:
  selection_failed_error(std::vector<std::optional<int>> ant_rssi, int attempts)
      : error(errc::selection_failed, "target SSID not found on any antenna"),
        ant_rssi_(std::move(ant_rssi)),
        attempts_(attempts) {}
  const std::vector<std::optional<int>>& ant_rssi() const noexcept { return ant_rssi_; }
  int attempts() const noexcept { return attempts_; }

private:
  std::vector<std::optional<int>> ant_rssi_;
  int attempts_;
};

inline std::string_view to_string(errc code) {
  switch (code) {
    case errc::parse: return "parse";
    case errc::insufficient_data: return "insufficient-data";
    case errc::invalid_argument: return "invalid-argument";
    case errc::geometry: return "geometry";
    case errc::index: return "index";
    case errc::no_signal: return "no-signal";
    case errc::selection_failed: return "selection-failed";
    case errc::unknown_command: return "unknown-command";
    case errc::bad_url: return "bad-url";
    case errc::empty_slot: return "empty-slot";
    case errc::no_stations: return "no-stations";
    case errc::format: return "format";
    case errc::protocol: return "protocol";
    case errc::startup: return "startup";
    case errc::config: return "config";
  }
  return "unknown";
}

}  // namespace webradio
