#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "webradio/icy.hpp"

namespace webradio {

// Receives demuxed audio in stream order. write() returns how many leading
// bytes were accepted; fewer than offered signals backpressure and the session
// retries the rest.
class audio_sink {
public:
  virtual ~audio_sink() = default;
  virtual std::size_t write(std::span<const std::uint8_t> bytes) = 0;
};

// Discards audio, counting bytes.
class null_sink final : public audio_sink {
public:
  std::size_t write(std::span<const std::uint8_t> bytes) override;
  std::uint64_t bytes_received() const { return count_.load(); }

private:
  std::atomic<std::uint64_t> count_{0};
};

// Writes the raw audio byte stream to a file.
class file_sink final : public audio_sink {
public:
  explicit file_sink(const std::filesystem::path& path);
  std::size_t write(std::span<const std::uint8_t> bytes) override;
  std::uint64_t bytes_received() const { return count_.load(); }

private:
  std::mutex mutex_;
  std::ofstream out_;
  std::atomic<std::uint64_t> count_{0};
};

// Keeps audio in memory; max_per_write > 0 simulates a slow consumer.
class memory_sink final : public audio_sink {
public:
  explicit memory_sink(std::size_t max_per_write = 0) : max_per_write_(max_per_write) {}
  std::size_t write(std::span<const std::uint8_t> bytes) override;
  std::vector<std::uint8_t> contents() const;
  std::size_t size() const;
  void clear();

private:
  mutable std::mutex mutex_;
  std::vector<std::uint8_t> data_;
  std::size_t max_per_write_;
};

struct session_options {
  int max_redirects = 5;
  // Reconnect after a mid-stream drop with capped exponential backoff.
  bool reconnect = true;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::milliseconds max_backoff{30000};
  std::chrono::milliseconds connect_timeout{5000};
  std::chrono::milliseconds read_timeout{15000};
};

// One streaming session on its own thread. Events other than audio reach
// `on_event` in stream order, from the session thread.
class stream_session {
public:
  stream_session(std::string url, std::shared_ptr<audio_sink> sink, event_fn on_event,
                 session_options options = {});
  ~stream_session();
  stream_session(const stream_session&) = delete;
  stream_session& operator=(const stream_session&) = delete;

  // Idempotent; callable from any thread. Returns once the session has stopped
  // writing to the sink (immediately when called from the session thread).
  void stop();
  // Blocks until the session ends on its own or is stopped.
  void wait();
  bool running() const { return running_.load(); }
  const std::string& url() const { return url_; }
  std::uint64_t audio_bytes() const { return audio_bytes_.load(); }

private:
  enum class outcome { finished, failed, stopped };
  struct attempt_result {
    outcome kind = outcome::finished;
    bool established = false;
    std::string reason;
  };

  void run();
  attempt_result stream_once();
  void forward(stream_event ev, bool& sink_stopped);
  bool deliver(std::span<const std::uint8_t> audio);
  bool sleep_for(std::chrono::milliseconds d);

  std::string url_;
  std::shared_ptr<audio_sink> sink_;
  event_fn on_event_;
  session_options options_;
  std::atomic<bool> stop_{false};
  std::atomic<bool> running_{true};
  std::atomic<std::uint64_t> audio_bytes_{0};
  std::optional<std::string> last_title_;
  std::mutex join_mutex_;
  std::thread thread_;
};

// Starts a session: GET with "Icy-MetaData: 1", accepts HTTP 2xx or "ICY 200",
// follows up to max_redirects redirects, then demuxes into `sink`.
std::unique_ptr<stream_session> play(const std::string& url, std::shared_ptr<audio_sink> sink,
                                     event_fn on_event, session_options options = {});

}  // namespace webradio
