#include "webradio/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "webradio/error.hpp"

namespace webradio {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw error(errc::config, "config: " + key + ": " + why);
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    bad(key, e.what());
  }
}

point parse_point(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    bad(key, "expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

rf_environment parse_environment(const json& j) {
  rf_environment env;
  if (!j.is_object()) bad("environment", "expected an object");
  if (auto it = j.find("device_position"); it != j.end()) {
    env.device_position = parse_point(*it, "environment.device_position");
  }
  env.device_orientation_deg = get_or(j, "device_orientation", env.device_orientation_deg);
  env.path_loss_exponent = get_or(j, "path_loss_exponent", env.path_loss_exponent);
  env.reference_loss_db = get_or(j, "reference_loss", env.reference_loss_db);
  env.shadowing_sigma_db = get_or(j, "shadowing_sigma", env.shadowing_sigma_db);
  env.scan_noise_sigma_db = get_or(j, "scan_noise_sigma", env.scan_noise_sigma_db);
  env.seed = get_or<std::uint64_t>(j, "seed", env.seed);
  env.sensitivity_floor_dbm = get_or(j, "sensitivity_floor", env.sensitivity_floor_dbm);

  auto aps = j.find("access_points");
  if (aps != j.end()) {
    if (!aps->is_array()) bad("environment.access_points", "expected an array");
    std::size_t i = 0;
    for (const auto& a : *aps) {
      std::string key = "environment.access_points[" + std::to_string(i++) + "]";
      if (!a.is_object() || !a.contains("ssid") || !a.contains("bssid") || !a.contains("position")) {
        bad(key, "needs ssid, bssid and position");
      }
      access_point ap;
      try {
        ap.ssid = a.at("ssid").get<std::string>();
        ap.bssid = bssid::parse(a.at("bssid").get<std::string>());
      } catch (const std::exception& e) {
        bad(key, e.what());
      }
      ap.position = parse_point(a.at("position"), key + ".position");
      ap.tx_power_dbm = get_or(a, "tx_power", ap.tx_power_dbm);
      env.access_points.push_back(std::move(ap));
    }
  }
  try {
    env.validate();
  } catch (const error& e) {
    bad("environment", e.what());
  }
  return env;
}

}  // namespace

void gateway_config::validate() const {
  if (target_ssid.empty()) bad("target_ssid", "must not be empty");
  if (num_antennas < 1) bad("num_antennas", "must be >= 1");
  if (retries_per_antenna < 1) bad("retries_per_antenna", "must be >= 1");
  if (static_cast<std::size_t>(num_antennas) != patterns.size()) {
    bad("num_antennas", std::to_string(num_antennas) + " antennas but " + std::to_string(patterns.size()) +
                            " patterns");
  }
  if (display_width == 0) bad("display_width", "must be >= 1");
}

std::pair<std::string, std::uint16_t> parse_listen_address(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) bad("listen_address", "expected host:port");
  std::string_view port_text = text.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (port_text.empty() || ec != std::errc{} || ptr != port_text.data() + port_text.size() || port > 65535) {
    bad("listen_address", "bad port in \"" + std::string(text) + "\"");
  }
  return {std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

gateway_config parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw error(errc::config, std::string("config: ") + e.what());
  }
  if (!j.is_object()) bad("<root>", "expected a JSON object");

  gateway_config cfg;
  cfg.target_ssid = get_or<std::string>(j, "target_ssid", "");
  cfg.password = get_or<std::string>(j, "password", "");
  std::tie(cfg.listen_host, cfg.listen_port) =
      parse_listen_address(get_or<std::string>(j, "listen_address", cfg.listen_address()));
  cfg.retries_per_antenna = get_or(j, "retries_per_antenna", cfg.retries_per_antenna);
  cfg.presets_file = resolve(base_dir, get_or<std::string>(j, "presets_file", "presets.tsv"));
  cfg.display_width = get_or(j, "display_width", cfg.display_width);
  cfg.display_tick = std::chrono::milliseconds(get_or<long>(j, "display_tick_ms", cfg.display_tick.count()));
  if (auto ui = get_or<std::string>(j, "ui_dir", ""); !ui.empty()) cfg.ui_dir = resolve(base_dir, ui);

  if (auto it = j.find("audio_sink"); it != j.end() && !it->is_null()) {
    std::string type = it->is_string() ? it->get<std::string>() : get_or<std::string>(*it, "type", "");
    if (type == "null") {
      cfg.audio_sink.type = sink_config::kind::null;
    } else if (type == "file") {
      std::string path = it->is_object() ? get_or<std::string>(*it, "path", "") : "";
      if (path.empty()) bad("audio_sink.path", "file sink needs a path");
      cfg.audio_sink = {sink_config::kind::file, resolve(base_dir, path)};
    } else {
      bad("audio_sink", "expected \"null\" or {\"type\": \"file\", \"path\": ...}");
    }
  }

  if (auto it = j.find("stream"); it != j.end() && it->is_object()) {
    cfg.stream.reconnect = get_or(*it, "reconnect", cfg.stream.reconnect);
    cfg.stream.max_redirects = get_or(*it, "max_redirects", cfg.stream.max_redirects);
    cfg.stream.initial_backoff =
        std::chrono::milliseconds(get_or<long>(*it, "initial_backoff_ms", cfg.stream.initial_backoff.count()));
    cfg.stream.max_backoff =
        std::chrono::milliseconds(get_or<long>(*it, "max_backoff_ms", cfg.stream.max_backoff.count()));
  }

  if (auto it = j.find("environment"); it != j.end()) {
    cfg.environment = parse_environment(*it);
    if (auto csv = it->find("pattern_csv"); csv != it->end()) {
      if (!csv->is_array() || csv->empty()) bad("environment.pattern_csv", "expected a list of paths");
      cfg.patterns.clear();
      int id = 0;
      for (const auto& p : *csv) {
        if (!p.is_string()) bad("environment.pattern_csv", "expected a list of paths");
        auto path = resolve(base_dir, p.get<std::string>());
        std::ifstream in(path);
        if (!in) bad("environment.pattern_csv", "cannot read " + path.string());
        try {
          cfg.patterns.push_back(load_pattern_csv(in, id++));
        } catch (const error& e) {
          bad("environment.pattern_csv", path.string() + ": " + e.what());
        }
      }
    }
  }
  cfg.num_antennas = get_or(j, "num_antennas", static_cast<int>(cfg.patterns.size()));
  cfg.validate();
  return cfg;
}

gateway_config load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw error(errc::config, "config: cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.parent_path().empty() ? "." : file.parent_path());
}

}  // namespace webradio
