#include "webradio/mock_stream_server.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <random>

#include "webradio/error.hpp"

namespace webradio {

using namespace std::chrono_literals;

namespace {

std::string lower(std::string s) {
  for (auto& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

}  // namespace

mock_stream_server::mock_stream_server(std::vector<std::uint8_t> audio, std::size_t metaint,
                                       std::vector<scheduled_title> titles, mock_stream_options options)
    : audio_(std::move(audio)),
      metaint_(metaint),
      layout_(build_icy_stream(audio_, metaint, titles)),
      options_(std::move(options)),
      listener_(options_.host, options_.port) {
  if (options_.max_write == 0) options_.max_write = 1;
  acceptor_ = std::thread([this] { accept_loop(); });
}

mock_stream_server::~mock_stream_server() { stop(); }

std::string mock_stream_server::stream_url() const {
  return "http://" + options_.host + ":" + std::to_string(port()) + "/stream";
}

std::string mock_stream_server::redirect_url(int hops) const {
  return "http://" + options_.host + ":" + std::to_string(port()) + "/redirect/" + std::to_string(hops);
}

void mock_stream_server::stop() {
  if (stop_.exchange(true)) return;
  if (acceptor_.joinable()) acceptor_.join();
  listener_.close();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(workers_mutex_);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void mock_stream_server::accept_loop() {
  std::uint64_t counter = 0;
  while (!stop_) {
    auto sock = listener_.accept(&stop_);
    if (!sock) continue;
    std::lock_guard lock(workers_mutex_);
    std::uint64_t conn_seed = options_.seed + 0x9e3779b97f4a7c15ull * ++counter;
    workers_.emplace_back([this, s = std::move(*sock), conn_seed]() mutable { serve(std::move(s), conn_seed); });
  }
}

void mock_stream_server::serve(net::tcp_socket sock, std::uint64_t conn_seed) {
  std::string request;
  std::uint8_t buf[2048];
  try {
    while (request.find("\r\n\r\n") == std::string::npos && request.size() < 16384) {
      auto n = sock.read_some(buf, 5s, &stop_);
      if (!n || *n == 0) return;
      request.append(reinterpret_cast<const char*>(buf), *n);
    }
  } catch (const net::io_error&) {
    return;
  }
  ++served_;

  auto line_end = request.find("\r\n");
  std::string request_line = request.substr(0, line_end);
  auto sp1 = request_line.find(' ');
  auto sp2 = request_line.find(' ', sp1 + 1);
  std::string path = sp1 == std::string::npos ? "" : request_line.substr(sp1 + 1, sp2 - sp1 - 1);
  bool wants_meta = lower(request).find("\r\nicy-metadata: 1") != std::string::npos;

  std::string base = "http://" + options_.host + ":" + std::to_string(port());
  if (path.rfind("/redirect/", 0) == 0) {
    int hops = 0;
    std::string_view count = std::string_view(path).substr(10);
    std::from_chars(count.data(), count.data() + count.size(), hops);
    std::string location = hops <= 1 ? base + "/stream" : base + "/redirect/" + std::to_string(hops - 1);
    sock.write_all("HTTP/1.0 302 Found\r\nLocation: " + location + "\r\nConnection: close\r\n\r\n", &stop_);
    return;
  }
  if (path != "/stream") {
    sock.write_all(std::string_view("HTTP/1.0 404 Not Found\r\nConnection: close\r\n\r\n"), &stop_);
    return;
  }

  std::string head = options_.icy_status_line ? "ICY 200 OK\r\n" : "HTTP/1.0 200 OK\r\n";
  head += "Content-Type: audio/mpeg\r\n";
  head += "icy-name: " + options_.station_name + "\r\n";
  if (wants_meta) head += "icy-metaint: " + std::to_string(metaint_) + "\r\n";
  head += "Connection: close\r\n\r\n";
  if (!sock.write_all(head, &stop_)) return;

  const std::vector<std::uint8_t>& body = wants_meta ? layout_.wire : audio_;
  std::mt19937_64 rng(conn_seed);
  std::uniform_int_distribution<std::size_t> size_dist(1, options_.max_write);
  auto started = std::chrono::steady_clock::now();
  std::size_t sent = 0;
  while (sent < body.size() && !stop_) {
    std::size_t n = std::min(size_dist(rng), body.size() - sent);
    if (!sock.write_all(std::span(body).subspan(sent, n), &stop_)) return;
    sent += n;
    if (options_.bytes_per_second > 0) {
      auto due = started + std::chrono::microseconds(sent * 1'000'000 / options_.bytes_per_second);
      while (std::chrono::steady_clock::now() < due && !stop_) std::this_thread::sleep_for(5ms);
    }
  }
  sock.shutdown_write();
  // wait for the client to close so no RST races the tail of the stream
  try {
    while (true) {
      auto n = sock.read_some(buf, 2s, &stop_);
      if (!n || *n == 0) break;
    }
  } catch (const net::io_error&) {
  }
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::startup, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::unique_ptr<mock_stream_server> serve_mock_stream(const std::filesystem::path& audio_file,
                                                      std::size_t metaint,
                                                      std::vector<scheduled_title> titles,
                                                      mock_stream_options options) {
  return std::make_unique<mock_stream_server>(read_file_bytes(audio_file), metaint, std::move(titles),
                                              std::move(options));
}

}  // namespace webradio
