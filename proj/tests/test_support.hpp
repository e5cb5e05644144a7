#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "webradio/config.hpp"

namespace webradio::testing {

// Fresh directory under the system temp dir, removed on destruction.
class temp_dir {
public:
  temp_dir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("webradio-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~temp_dir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  temp_dir(const temp_dir&) = delete;
  temp_dir& operator=(const temp_dir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// AP "mynet" due north of a device facing 0 deg, 10 m away, 20 dBm: bearing 90.
inline gateway_config bearing_90_config(const std::filesystem::path& dir) {
  gateway_config cfg;
  cfg.target_ssid = "mynet";
  cfg.listen_host = "127.0.0.1";
  cfg.listen_port = 0;
  access_point ap;
  ap.ssid = "mynet";
  ap.bssid = bssid::parse("02:00:00:00:00:01");
  ap.position = {0, 10};
  ap.tx_power_dbm = 20;
  cfg.environment.access_points = {ap};
  cfg.presets_file = dir / "presets.tsv";
  cfg.display_tick = std::chrono::milliseconds(0);
  cfg.stream.reconnect = false;
  return cfg;
}

}  // namespace webradio::testing
