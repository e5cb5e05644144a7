#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "webradio/display.hpp"
#include "webradio/rf_model.hpp"
#include "webradio/stream_client.hpp"

namespace webradio {

struct sink_config {
  enum class kind { null, file };
  kind type = kind::null;
  std::filesystem::path path;
};

struct gateway_config {
  std::string target_ssid;
  std::string password;  // kept for parity with the firmware menu; never used
  std::string listen_host = "127.0.0.1";
  std::uint16_t listen_port = 8080;
  rf_environment environment;
  std::vector<antenna_pattern> patterns = default_patterns();
  int num_antennas = 3;
  int retries_per_antenna = 3;
  std::filesystem::path presets_file = "presets.tsv";
  sink_config audio_sink;
  std::size_t display_width = kDefaultDisplayWidth;
  std::chrono::milliseconds display_tick{250};  // 0 disables the ticker thread
  session_options stream;
  std::filesystem::path ui_dir;  // served under /ui/ when set

  // Throws error(config).
  void validate() const;
  std::string listen_address() const { return listen_host + ":" + std::to_string(listen_port); }
};

// "host:port"; throws error(config).
std::pair<std::string, std::uint16_t> parse_listen_address(std::string_view text);

// Relative paths (presets file, pattern CSVs, sink file, ui dir) resolve
// against `base_dir`. Throws error(config) with the offending key.
gateway_config parse_config(std::string_view json_text, const std::filesystem::path& base_dir);
gateway_config load_config(const std::filesystem::path& file);

}  // namespace webradio
