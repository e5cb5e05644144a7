#include "webradio/stream_client.hpp"

#include <algorithm>
#include <charconv>

#include "webradio/error.hpp"
#include "webradio/net.hpp"

namespace webradio {

using namespace std::chrono_literals;

std::size_t null_sink::write(std::span<const std::uint8_t> bytes) {
  count_ += bytes.size();
  return bytes.size();
}

file_sink::file_sink(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw error(errc::startup, "cannot open audio sink file " + path.string());
}

std::size_t file_sink::write(std::span<const std::uint8_t> bytes) {
  std::lock_guard lock(mutex_);
  out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out_.flush();
  count_ += bytes.size();
  return bytes.size();
}

std::size_t memory_sink::write(std::span<const std::uint8_t> bytes) {
  std::lock_guard lock(mutex_);
  std::size_t n = max_per_write_ ? std::min(max_per_write_, bytes.size()) : bytes.size();
  data_.insert(data_.end(), bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
  return n;
}

std::vector<std::uint8_t> memory_sink::contents() const {
  std::lock_guard lock(mutex_);
  return data_;
}

std::size_t memory_sink::size() const {
  std::lock_guard lock(mutex_);
  return data_.size();
}

void memory_sink::clear() {
  std::lock_guard lock(mutex_);
  data_.clear();
}

stream_session::stream_session(std::string url, std::shared_ptr<audio_sink> sink, event_fn on_event,
                               session_options options)
    : url_(std::move(url)), sink_(std::move(sink)), on_event_(std::move(on_event)), options_(options) {
  thread_ = std::thread([this] { run(); });
}

stream_session::~stream_session() { stop(); }

void stream_session::stop() {
  stop_ = true;
  if (std::this_thread::get_id() == thread_.get_id()) return;
  std::lock_guard lock(join_mutex_);
  if (thread_.joinable()) thread_.join();
}

void stream_session::wait() {
  if (std::this_thread::get_id() == thread_.get_id()) return;
  std::lock_guard lock(join_mutex_);
  if (thread_.joinable()) thread_.join();
}

bool stream_session::sleep_for(std::chrono::milliseconds d) {
  auto deadline = std::chrono::steady_clock::now() + d;
  while (std::chrono::steady_clock::now() < deadline) {
    if (stop_) return false;
    std::this_thread::sleep_for(std::min<std::chrono::milliseconds>(20ms, d));
  }
  return !stop_;
}

bool stream_session::deliver(std::span<const std::uint8_t> audio) {
  while (!audio.empty()) {
    if (stop_) return false;
    std::size_t n = sink_->write(audio);
    audio_bytes_ += n;
    audio = audio.subspan(n);
    if (n == 0) std::this_thread::sleep_for(2ms);
  }
  return true;
}

void stream_session::forward(stream_event ev, bool& sink_stopped) {
  if (auto* chunk = std::get_if<event::audio_chunk>(&ev)) {
    if (!sink_stopped && !deliver(chunk->bytes)) sink_stopped = true;
    return;
  }
  if (auto* title = std::get_if<event::title_change>(&ev)) {
    if (title->title == last_title_) return;
    last_title_ = title->title;
  }
  if (on_event_) on_event_(std::move(ev));
}

stream_session::attempt_result stream_session::stream_once() {
  attempt_result result;
  auto fail = [&](std::string reason) {
    result.kind = stop_ ? outcome::stopped : outcome::failed;
    result.reason = std::move(reason);
    return result;
  };

  try {
    std::string current = url_;
    net::tcp_socket sock;
    net::response_head head;
    std::vector<std::uint8_t> body;

    for (int hop = 0;; ++hop) {
      net::url target;
      try {
        target = net::url::parse(current);
      } catch (const error& e) {
        return fail("bad url");
      }
      if (target.scheme != "http") return fail("tls unsupported");

      sock = net::tcp_socket::connect(target.host, target.port, options_.connect_timeout, &stop_);
      std::string request = "GET " + target.target + " HTTP/1.0\r\n" + "Host: " + target.authority() +
                            "\r\n" + "User-Agent: webradio/1.0\r\n" + "Accept: */*\r\n" +
                            "Icy-MetaData: 1\r\n" + "Connection: close\r\n\r\n";
      if (!sock.write_all(request, &stop_)) return fail("write");
      body.clear();
      head = net::read_response_head(sock, body, options_.read_timeout, &stop_);

      if (head.status >= 300 && head.status < 400) {
        auto location = head.header("location");
        if (!location) return fail("http " + std::to_string(head.status) + " without location");
        if (hop >= options_.max_redirects) return fail("too many redirects");
        current = net::resolve_location(target, *location);
        continue;
      }
      if (head.status < 200 || head.status >= 300) return fail("http " + std::to_string(head.status));
      break;
    }
    result.established = true;

    icy_headers icy;
    try {
      icy = parse_icy_headers(head.header_lines);
    } catch (const error& e) {
      return fail(std::string("protocol: ") + e.what());
    }

    bool chunked = false;
    if (auto te = head.header("transfer-encoding")) {
      chunked = te->find("chunked") != std::string::npos;
    }
    std::optional<std::uint64_t> remaining;
    if (auto cl = head.header("content-length"); cl && !chunked) {
      std::uint64_t n = 0;
      auto [ptr, ec] = std::from_chars(cl->data(), cl->data() + cl->size(), n);
      if (ec == std::errc{}) remaining = n;
    }

    icy_demuxer demux(icy.metaint);
    net::chunked_decoder dechunk;
    bool sink_stopped = false;
    auto emit = [&](stream_event ev) { forward(std::move(ev), sink_stopped); };
    std::vector<std::uint8_t> decoded;

    auto consume = [&](std::span<const std::uint8_t> raw) {
      std::span<const std::uint8_t> payload = raw;
      if (chunked) {
        decoded.clear();
        dechunk.feed(raw, decoded);
        payload = decoded;
      }
      if (remaining) {
        auto n = static_cast<std::size_t>(std::min<std::uint64_t>(*remaining, payload.size()));
        payload = payload.first(n);
        *remaining -= n;
      }
      demux.feed(payload, emit);
    };
    auto body_complete = [&] { return (remaining && *remaining == 0) || (chunked && dechunk.done()); };

    consume(body);
    std::vector<std::uint8_t> buf(16 * 1024);
    while (!body_complete() && !sink_stopped) {
      auto n = sock.read_some(buf, options_.read_timeout, &stop_);
      if (!n) break;
      if (*n == 0) {
        if ((remaining && *remaining > 0) || chunked) return fail("connection dropped");
        break;
      }
      consume(std::span(buf).first(*n));
    }
    if (stop_ || sink_stopped) {
      result.kind = outcome::stopped;
      return result;
    }

    std::optional<std::string> tail_error;
    demux.finish([&](stream_event ev) {
      if (auto* e = std::get_if<event::transport_error>(&ev)) tail_error = e->reason;
    });
    if (tail_error) return fail(*tail_error);
    result.kind = outcome::finished;
    return result;
  } catch (const net::io_error& e) {
    return fail(e.reason);
  }
}

void stream_session::run() {
  auto backoff = options_.initial_backoff;
  bool ever_established = false;
  while (!stop_) {
    auto r = stream_once();
    ever_established = ever_established || r.established;
    if (r.kind == outcome::stopped || stop_) break;
    if (r.kind == outcome::finished) {
      if (on_event_) on_event_(event::end_of_stream{});
      break;
    }
    if (options_.reconnect && ever_established) {
      if (r.established) backoff = options_.initial_backoff;
      if (!sleep_for(backoff)) break;
      backoff = std::min(backoff * 2, options_.max_backoff);
      continue;
    }
    if (on_event_) on_event_(event::transport_error{r.reason});
    break;
  }
  running_ = false;
}

std::unique_ptr<stream_session> play(const std::string& url, std::shared_ptr<audio_sink> sink,
                                     event_fn on_event, session_options options) {
  return std::make_unique<stream_session>(url, std::move(sink), std::move(on_event), options);
}

}  // namespace webradio
