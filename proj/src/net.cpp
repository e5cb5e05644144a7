#include "webradio/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <memory>
#include <utility>

#include "webradio/error.hpp"

namespace webradio::net {

namespace {

using namespace std::chrono_literals;
using clock = std::chrono::steady_clock;

constexpr auto kSlice = 50ms;
constexpr std::size_t kMaxHeadBytes = 64 * 1024;

bool cancelled(const std::atomic<bool>* cancel) {
  return cancel && cancel->load(std::memory_order_relaxed);
}

void set_nonblocking(int fd) {
  int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

// Waits for `events` on fd. Returns 1 ready, 0 timeout, -1 cancelled.
int wait_fd(int fd, short events, std::chrono::milliseconds timeout, const std::atomic<bool>* cancel) {
  auto deadline = clock::now() + timeout;
  while (true) {
    if (cancelled(cancel)) return -1;
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
    if (left <= 0ms) return 0;
    pollfd p{fd, events, 0};
    int rc = ::poll(&p, 1, static_cast<int>(std::min(left, std::chrono::milliseconds(kSlice)).count()));
    if (rc > 0) return 1;
    if (rc < 0 && errno != EINTR) return 1;  // let the following syscall report the error
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

int hex_digit(std::uint8_t c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

url url::parse(std::string_view text) {
  url u;
  auto sep = text.find("://");
  if (sep == std::string_view::npos) throw error(errc::bad_url, "missing scheme: " + std::string(text));
  u.scheme = lower(text.substr(0, sep));
  if (u.scheme == "http") {
    u.port = 80;
  } else if (u.scheme == "https") {
    u.port = 443;
  } else {
    throw error(errc::bad_url, "unsupported scheme: " + u.scheme);
  }
  std::string_view rest = text.substr(sep + 3);
  auto path_start = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, path_start);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);

  std::string_view host = authority;
  if (!authority.empty() && authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) throw error(errc::bad_url, "unterminated IPv6 literal");
    host = authority.substr(1, close - 1);
    authority.remove_prefix(close + 1);
    if (!authority.empty() && authority.front() != ':') throw error(errc::bad_url, "bad authority");
  } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    authority.remove_prefix(colon);
  } else {
    authority = {};
  }
  if (!authority.empty() && authority.front() == ':') {
    auto port_text = authority.substr(1);
    unsigned port = 0;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (port_text.empty() || ec != std::errc{} || ptr != port_text.data() + port_text.size() || port == 0 ||
        port > 65535) {
      throw error(errc::bad_url, "bad port in " + std::string(text));
    }
    u.port = static_cast<std::uint16_t>(port);
  }
  if (host.empty()) throw error(errc::bad_url, "missing host: " + std::string(text));
  u.host = std::string(host);

  std::string_view target = path_start == std::string_view::npos ? "" : rest.substr(path_start);
  if (auto hash = target.find('#'); hash != std::string_view::npos) target = target.substr(0, hash);
  u.target = target.empty() || target.front() != '/' ? "/" + std::string(target) : std::string(target);
  return u;
}

std::string url::authority() const {
  bool v6 = host.find(':') != std::string::npos;
  std::string h = v6 ? "[" + host + "]" : host;
  bool default_port = (scheme == "http" && port == 80) || (scheme == "https" && port == 443);
  return default_port ? h : h + ":" + std::to_string(port);
}

std::string url::to_string() const { return scheme + "://" + authority() + target; }

std::string resolve_location(const url& base, std::string_view location) {
  if (location.find("://") != std::string_view::npos) return std::string(location);
  if (location.substr(0, 2) == "//") return base.scheme + ":" + std::string(location);
  if (!location.empty() && location.front() == '/') {
    return base.scheme + "://" + base.authority() + std::string(location);
  }
  std::string dir = base.target.substr(0, base.target.find('?'));
  dir = dir.substr(0, dir.rfind('/') + 1);
  return base.scheme + "://" + base.authority() + dir + std::string(location);
}

tcp_socket::~tcp_socket() { close(); }

tcp_socket::tcp_socket(tcp_socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

tcp_socket& tcp_socket::operator=(tcp_socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

tcp_socket tcp_socket::connect(const std::string& host, std::uint16_t port,
                               std::chrono::milliseconds timeout, const std::atomic<bool>* cancel) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || !res) {
    throw io_error{"dns"};
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);

  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    tcp_socket sock(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!sock.valid()) continue;
    set_nonblocking(sock.fd_);
    int rc = ::connect(sock.fd_, ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno != EINPROGRESS) continue;
    if (rc != 0) {
      int ready = wait_fd(sock.fd_, POLLOUT, timeout, cancel);
      if (ready < 0) throw io_error{"cancelled"};
      if (ready == 0) continue;
      int err = 0;
      socklen_t len = sizeof(err);
      ::getsockopt(sock.fd_, SOL_SOCKET, SO_ERROR, &err, &len);
      if (err != 0) continue;
    }
    int one = 1;
    ::setsockopt(sock.fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return sock;
  }
  throw io_error{"connect"};
}

std::optional<std::size_t> tcp_socket::read_some(std::span<std::uint8_t> buf,
                                                 std::chrono::milliseconds timeout,
                                                 const std::atomic<bool>* cancel) {
  while (true) {
    int ready = wait_fd(fd_, POLLIN, timeout, cancel);
    if (ready < 0) return std::nullopt;
    if (ready == 0) throw io_error{"timeout"};
    ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
    throw io_error{errno == ECONNRESET ? "reset" : "read"};
  }
}

bool tcp_socket::write_all(std::span<const std::uint8_t> bytes, const std::atomic<bool>* cancel) {
  while (!bytes.empty()) {
    ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n > 0) {
      bytes = bytes.subspan(static_cast<std::size_t>(n));
      continue;
    }
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) {
      if (wait_fd(fd_, POLLOUT, std::chrono::hours(1), cancel) < 0) return false;
      continue;
    }
    return false;
  }
  return true;
}

bool tcp_socket::write_all(std::string_view text, const std::atomic<bool>* cancel) {
  return write_all(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), cancel);
}

void tcp_socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void tcp_socket::shutdown_write() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_WR);
}

void tcp_socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

tcp_listener::tcp_listener(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw error(errc::startup, "socket: " + std::string(std::strerror(errno)));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw error(errc::startup, "listen address must be an IPv4 literal: " + host);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd_, 16) != 0) {
    std::string why = std::strerror(errno);
    ::close(fd_);
    throw error(errc::startup, "bind " + host + ":" + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  set_nonblocking(fd_);
}

tcp_listener::~tcp_listener() { close(); }

std::optional<tcp_socket> tcp_listener::accept(const std::atomic<bool>* cancel) {
  while (fd_ >= 0) {
    int ready = wait_fd(fd_, POLLIN, std::chrono::hours(24), cancel);
    if (ready < 0) return std::nullopt;
    if (ready == 0) continue;
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      set_nonblocking(fd);
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return tcp_socket(fd);
    }
    if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR && errno != ECONNABORTED) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

void tcp_listener::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::optional<std::string> response_head::header(std::string_view name) const {
  std::string want = lower(name);
  for (const auto& line : header_lines) {
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = lower(std::string_view(line).substr(0, colon));
    while (!key.empty() && key.back() == ' ') key.pop_back();
    if (key != want) continue;
    std::string_view value = std::string_view(line).substr(colon + 1);
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) value.remove_prefix(1);
    return std::string(value);
  }
  return std::nullopt;
}

response_head read_response_head(tcp_socket& sock, std::vector<std::uint8_t>& leftover,
                                 std::chrono::milliseconds timeout, const std::atomic<bool>* cancel) {
  std::string raw;
  std::uint8_t buf[4096];
  std::size_t head_end = std::string::npos;
  std::size_t sep_len = 0;
  while (head_end == std::string::npos) {
    auto n = sock.read_some(buf, timeout, cancel);
    if (!n) throw io_error{"cancelled"};
    if (*n == 0) throw io_error{"eof in response head"};
    raw.append(reinterpret_cast<const char*>(buf), *n);
    // tolerate bare-LF servers
    auto crlf = raw.find("\r\n\r\n");
    auto lf = raw.find("\n\n");
    if (crlf != std::string::npos && (lf == std::string::npos || crlf < lf)) {
      head_end = crlf;
      sep_len = 4;
    } else if (lf != std::string::npos) {
      head_end = lf;
      sep_len = 2;
    }
    if (head_end == std::string::npos && raw.size() > kMaxHeadBytes) throw io_error{"response head too large"};
  }
  leftover.insert(leftover.end(), raw.begin() + static_cast<std::ptrdiff_t>(head_end + sep_len), raw.end());

  response_head head;
  std::string_view text(raw.data(), head_end);
  bool first = true;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (first) {
      head.status_line = std::string(line);
      first = false;
    } else if (!line.empty()) {
      head.header_lines.emplace_back(line);
    }
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }

  std::string_view sl = head.status_line;
  if (sl.substr(0, 4) == "ICY ") {
    head.icy = true;
  } else if (sl.substr(0, 5) != "HTTP/") {
    throw io_error{"bad status line"};
  }
  auto sp = sl.find(' ');
  auto code = sp == std::string_view::npos ? std::string_view{} : sl.substr(sp + 1, 3);
  auto [ptr, ec] = std::from_chars(code.data(), code.data() + code.size(), head.status);
  if (code.size() != 3 || ec != std::errc{} || ptr != code.data() + 3) throw io_error{"bad status line"};
  return head;
}

void chunked_decoder::feed(std::span<const std::uint8_t> in, std::vector<std::uint8_t>& out) {
  std::size_t i = 0;
  while (i < in.size() && state_ != state::done) {
    std::uint8_t c = in[i];
    switch (state_) {
      case state::size: {
        int d = hex_digit(c);
        if (d >= 0) {
          if (remaining_ > (std::uint64_t{1} << 56)) throw io_error{"chunk too large"};
          remaining_ = remaining_ * 16 + static_cast<std::uint64_t>(d);
          saw_digit_ = true;
        } else if (c == ';' && saw_digit_) {
          state_ = state::size_ext;
        } else if (c == '\r' && saw_digit_) {
          state_ = state::size_lf;
        } else if (c == '\n' && saw_digit_) {
          state_ = remaining_ == 0 ? state::trailer : state::data;
          saw_digit_ = false;
          trailer_line_ = 0;
        } else {
          throw io_error{"bad chunk size"};
        }
        ++i;
        break;
      }
      case state::size_ext:
        if (c == '\n') {
          state_ = remaining_ == 0 ? state::trailer : state::data;
          saw_digit_ = false;
          trailer_line_ = 0;
        }
        ++i;
        break;
      case state::size_lf:
        if (c != '\n') throw io_error{"bad chunk size"};
        state_ = remaining_ == 0 ? state::trailer : state::data;
        saw_digit_ = false;
        trailer_line_ = 0;
        ++i;
        break;
      case state::data: {
        auto n = static_cast<std::size_t>(std::min<std::uint64_t>(remaining_, in.size() - i));
        out.insert(out.end(), in.begin() + static_cast<std::ptrdiff_t>(i),
                   in.begin() + static_cast<std::ptrdiff_t>(i + n));
        remaining_ -= n;
        i += n;
        if (remaining_ == 0) state_ = state::data_cr;
        break;
      }
      case state::data_cr:
        if (c == '\r') {
          state_ = state::data_lf;
        } else if (c == '\n') {
          state_ = state::size;
        } else {
          throw io_error{"missing chunk terminator"};
        }
        ++i;
        break;
      case state::data_lf:
        if (c != '\n') throw io_error{"missing chunk terminator"};
        state_ = state::size;
        ++i;
        break;
      case state::trailer:
        if (c == '\n') {
          if (trailer_line_ == 0) state_ = state::done;
          trailer_line_ = 0;
        } else if (c != '\r') {
          ++trailer_line_;
        }
        ++i;
        break;
      case state::done:
        break;
    }
  }
}

}  // namespace webradio::net
