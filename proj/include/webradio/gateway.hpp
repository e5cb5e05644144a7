#pragma once

#include <array>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "json.hpp"
#include "webradio/antenna_selector.hpp"
#include "webradio/config.hpp"
#include "webradio/display.hpp"
#include "webradio/preset_protocol.hpp"
#include "webradio/stream_client.hpp"

namespace httplib {
class Server;
}

namespace webradio {

enum class gateway_phase { selecting, idle, playing, error };

std::string_view to_string(gateway_phase phase);

// Stand-in for the RGB selection LED: 0 red, 1 green, 2 blue.
// Throws error(index) for anything else.
std::string_view antenna_indicator(std::size_t best_antenna);

struct gateway_status {
  gateway_phase phase = gateway_phase::selecting;
  rssi_table ant_rssi;
  std::optional<std::size_t> best_antenna;
  std::optional<int> current_slot;
  std::optional<std::string> station_url;
  std::optional<std::string> stream_title;
  std::string ip_address;
  std::array<std::string, 3> display;
};

// Fixed schema: phase, ant_rssi, best_antenna, antenna_color, current_slot,
// station_url, stream_title, ip_address, display. Absent values are null.
nlohmann::json to_json(const gateway_status& status);

struct http_reply {
  int status = 200;
  std::string content_type = "text/plain";
  std::string body;
};

// Boot sequence (antenna selection, then radio), control plane and display.
//
// Mutations (commands, rescan) are serialized by command_mutex_.
// state_mutex_ guards store/status/display for short sections only, so status
// reads never wait on the network.
class gateway {
public:
  explicit gateway(gateway_config config, log_fn log = {});
  ~gateway();
  gateway(const gateway&) = delete;
  gateway& operator=(const gateway&) = delete;

  // Selection failure leaves the gateway in the error phase with the HTTP
  // server still up. Throws on bind failure or an unreadable presets file.
  void boot();
  void shutdown();

  // Route one request; also what the HTTP server calls. `target` is the raw
  // request target including any query string.
  http_reply handle_request(std::string_view method, std::string_view target);

  gateway_status status() const;
  preset_store store() const;
  void tick_display();
  // Re-runs antenna selection with playback paused.
  void rescan();

  std::uint16_t port() const { return bound_port_; }
  const gateway_config& config() const { return config_; }
  const std::shared_ptr<audio_sink>& sink() const { return sink_; }
  // Sessions started so far (each station change restarts the session).
  int sessions_started() const;

private:
  void select_antenna();
  void start_playback();
  void stop_playback();
  void on_stream_event(std::uint64_t generation, const stream_event& ev);
  void persist(const preset_store& store);
  void refresh_display();
  void ticker_loop();

  gateway_config config_;
  log_fn log_;
  std::shared_ptr<audio_sink> sink_;

  // Lock order: command_mutex_, playback_mutex_, state_mutex_.
  std::mutex command_mutex_;
  mutable std::mutex state_mutex_;
  gateway_status status_;
  preset_store store_;
  display_model display_;

  std::mutex playback_mutex_;
  std::unique_ptr<stream_session> session_;
  std::uint64_t generation_ = 0;  // written under both mutexes
  std::atomic<int> sessions_started_{0};

  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
  std::uint16_t bound_port_ = 0;

  std::mutex ticker_mutex_;
  std::condition_variable ticker_cv_;
  bool stopping_ = false;
  std::thread ticker_thread_;
  bool booted_ = false;
};

}  // namespace webradio
