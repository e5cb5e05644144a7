#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "webradio/icy.hpp"
#include "webradio/net.hpp"

namespace webradio {

struct mock_stream_options {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 = ephemeral
  std::string station_name = "Mock Radio";
  bool icy_status_line = false;  // "ICY 200 OK" instead of "HTTP/1.0 200 OK"
  // Writes are split at random sizes in [1, max_write] drawn from `seed`.
  std::size_t max_write = 8192;
  std::uint64_t seed = 1;
  // 0 = unthrottled.
  std::size_t bytes_per_second = 0;
};

// Local ICY server used by tests and demos.
//   GET /stream           the stream (metadata only if "Icy-MetaData: 1" was sent)
//   GET /redirect/<n>     302 chain of length n ending at /stream
//   anything else         404
class mock_stream_server {
public:
  // Throws error(startup) for metaint == 0 or an oversize title.
  mock_stream_server(std::vector<std::uint8_t> audio, std::size_t metaint,
                     std::vector<scheduled_title> titles, mock_stream_options options = {});
  ~mock_stream_server();
  mock_stream_server(const mock_stream_server&) = delete;
  mock_stream_server& operator=(const mock_stream_server&) = delete;

  std::uint16_t port() const { return listener_.port(); }
  std::string stream_url() const;
  std::string redirect_url(int hops) const;
  const icy_layout& layout() const { return layout_; }
  const std::vector<std::uint8_t>& audio() const { return audio_; }
  int connections_served() const { return served_.load(); }

  void stop();

private:
  void accept_loop();
  void serve(net::tcp_socket sock, std::uint64_t conn_seed);

  std::vector<std::uint8_t> audio_;
  std::size_t metaint_;
  icy_layout layout_;
  mock_stream_options options_;
  net::tcp_listener listener_;
  std::atomic<bool> stop_{false};
  std::atomic<int> served_{0};
  std::mutex workers_mutex_;
  std::vector<std::thread> workers_;
  std::thread acceptor_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// serve_mock_stream(file, metaint, titles). Throws error(startup) if the file
// cannot be read or metaint is zero.
std::unique_ptr<mock_stream_server> serve_mock_stream(const std::filesystem::path& audio_file,
                                                      std::size_t metaint,
                                                      std::vector<scheduled_title> titles,
                                                      mock_stream_options options = {});

}  // namespace webradio
