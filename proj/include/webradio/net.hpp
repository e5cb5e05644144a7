#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace webradio::net {

struct url {
  std::string scheme;  // lower-case
  std::string host;
  std::uint16_t port = 80;
  std::string target = "/";  // path + query

  // Throws error(bad_url).
  static url parse(std::string_view text);
  std::string authority() const;
  std::string to_string() const;
};

// Resolve a Location header against the URL it came from.
std::string resolve_location(const url& base, std::string_view location);

// Thrown by socket operations; `reason` is a short tag such as "connect".
struct io_error {
  std::string reason;
};

// Blocking socket with poll-based timeouts. Waits are sliced so that a set
// `cancel` flag interrupts them within ~50 ms.
class tcp_socket {
public:
  tcp_socket() = default;
  explicit tcp_socket(int fd) : fd_(fd) {}
  ~tcp_socket();
  tcp_socket(tcp_socket&& other) noexcept;
  tcp_socket& operator=(tcp_socket&& other) noexcept;
  tcp_socket(const tcp_socket&) = delete;
  tcp_socket& operator=(const tcp_socket&) = delete;

  static tcp_socket connect(const std::string& host, std::uint16_t port,
                            std::chrono::milliseconds timeout, const std::atomic<bool>* cancel);

  // 0 on orderly EOF; nullopt when cancelled.
  std::optional<std::size_t> read_some(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout,
                                       const std::atomic<bool>* cancel);
  // false when the peer went away or `cancel` fired.
  bool write_all(std::span<const std::uint8_t> bytes, const std::atomic<bool>* cancel = nullptr);
  bool write_all(std::string_view text, const std::atomic<bool>* cancel = nullptr);

  void shutdown();
  // Half-close: sends FIN after queued data, keeps reading possible.
  void shutdown_write();
  void close();
  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

private:
  int fd_ = -1;
};

class tcp_listener {
public:
  // Port 0 picks an ephemeral port.
  tcp_listener(const std::string& host, std::uint16_t port);
  ~tcp_listener();
  tcp_listener(const tcp_listener&) = delete;
  tcp_listener& operator=(const tcp_listener&) = delete;

  std::uint16_t port() const { return port_; }
  // nullopt on cancel or after close().
  std::optional<tcp_socket> accept(const std::atomic<bool>* cancel);
  void close();

private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

struct response_head {
  std::string status_line;
  int status = 0;
  bool icy = false;  // "ICY 200 OK" style status line
  std::vector<std::string> header_lines;

  std::optional<std::string> header(std::string_view name) const;
};

// Parses status line and headers; body bytes that arrived with the head are
// appended to `leftover`. Throws io_error.
response_head read_response_head(tcp_socket& sock, std::vector<std::uint8_t>& leftover,
                                 std::chrono::milliseconds timeout, const std::atomic<bool>* cancel);

// Incremental Transfer-Encoding: chunked decoder.
class chunked_decoder {
public:
  // Appends decoded body bytes to `out`. Throws io_error on malformed framing.
  void feed(std::span<const std::uint8_t> in, std::vector<std::uint8_t>& out);
  bool done() const { return state_ == state::done; }

private:
  enum class state { size, size_ext, size_lf, data, data_cr, data_lf, trailer, done };
  state state_ = state::size;
  std::uint64_t remaining_ = 0;
  bool saw_digit_ = false;
  std::size_t trailer_line_ = 0;
};

}  // namespace webradio::net
