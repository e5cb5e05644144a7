#include <gtest/gtest.h>

#include <condition_variable>
#include <random>

#include "webradio/error.hpp"
#include "webradio/mock_stream_server.hpp"
#include "webradio/net.hpp"
#include "webradio/stream_client.hpp"

using namespace webradio;
using namespace std::chrono_literals;

namespace {

std::vector<std::uint8_t> fixture(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

// Thread-safe event log.
struct recorder {
  std::mutex m;
  std::condition_variable cv;
  std::vector<std::string> titles;
  std::vector<std::string> errors;
  int ends = 0;

  event_fn fn() {
    return [this](stream_event ev) {
      std::lock_guard lock(m);
      if (auto* t = std::get_if<event::title_change>(&ev)) titles.push_back(t->title);
      if (auto* e = std::get_if<event::transport_error>(&ev)) errors.push_back(e->reason);
      if (std::holds_alternative<event::end_of_stream>(ev)) ++ends;
      cv.notify_all();
    };
  }
};

session_options fast_options() {
  session_options o;
  o.reconnect = false;
  o.connect_timeout = 2000ms;
  o.read_timeout = 5000ms;
  return o;
}

std::uint16_t closed_port() {
  net::tcp_listener l("127.0.0.1", 0);
  return l.port();
}

}  // namespace

TEST(StreamSession, DeliversExactAudioAndTitle) {
  auto audio = fixture(65536, 1);
  mock_stream_server server(audio, 16000, {{0, "Hey Jude"}});
  auto sink = std::make_shared<memory_sink>();
  recorder rec;
  auto s = play(server.stream_url(), sink, rec.fn(), fast_options());
  s->wait();
  EXPECT_EQ(sink->contents(), audio);
  EXPECT_EQ(s->audio_bytes(), audio.size());
  EXPECT_EQ(rec.titles, std::vector<std::string>{"Hey Jude"});
  EXPECT_EQ(rec.ends, 1);
  EXPECT_TRUE(rec.errors.empty());
  EXPECT_FALSE(s->running());
}

TEST(StreamSession, IcyStatusLineAccepted) {
  auto audio = fixture(10000, 2);
  mock_stream_options opts;
  opts.icy_status_line = true;
  mock_stream_server server(audio, 1000, {{500, "Let It Be"}}, opts);
  auto sink = std::make_shared<memory_sink>();
  recorder rec;
  auto s = play(server.stream_url(), sink, rec.fn(), fast_options());
  s->wait();
  EXPECT_EQ(sink->contents(), audio);
  EXPECT_EQ(rec.titles, std::vector<std::string>{"Let It Be"});
}

TEST(StreamSession, FollowsRedirects) {
  auto audio = fixture(5000, 3);
  mock_stream_server server(audio, 7, {});
  auto sink = std::make_shared<memory_sink>();
  recorder rec;
  auto s = play(server.redirect_url(5), sink, rec.fn(), fast_options());
  s->wait();
  EXPECT_EQ(sink->contents(), audio);
  EXPECT_EQ(rec.ends, 1);
}

TEST(StreamSession, TooManyRedirects) {
  mock_stream_server server(fixture(100, 4), 10, {});
  auto sink = std::make_shared<memory_sink>();
  recorder rec;
  auto s = play(server.redirect_url(6), sink, rec.fn(), fast_options());
  s->wait();
  EXPECT_EQ(rec.errors, std::vector<std::string>{"too many redirects"});
  EXPECT_EQ(sink->size(), 0u);
}

TEST(StreamSession, HttpErrorStatus) {
  mock_stream_server server(fixture(100, 5), 10, {});
  recorder rec;
  auto url = "http://127.0.0.1:" + std::to_string(server.port()) + "/missing";
  auto s = play(url, std::make_shared<null_sink>(), rec.fn(), fast_options());
  s->wait();
  EXPECT_EQ(rec.errors, std::vector<std::string>{"http 404"});
}

TEST(StreamSession, ConnectionRefused) {
  recorder rec;
  auto url = "http://127.0.0.1:" + std::to_string(closed_port()) + "/stream";
  auto opts = fast_options();
  opts.reconnect = true;  // never established, so no retry
  auto s = play(url, std::make_shared<null_sink>(), rec.fn(), opts);
  s->wait();
  EXPECT_EQ(rec.errors, std::vector<std::string>{"connect"});
}

TEST(StreamSession, UnsupportedAndBadUrls) {
  recorder rec;
  play("https://example.invalid/stream", std::make_shared<null_sink>(), rec.fn(), fast_options())->wait();
  play("not a url", std::make_shared<null_sink>(), rec.fn(), fast_options())->wait();
  EXPECT_EQ(rec.errors, (std::vector<std::string>{"tls unsupported", "bad url"}));
}

TEST(StreamSession, SlowSinkStillReceivesEverything) {
  auto audio = fixture(40000, 6);
  mock_stream_server server(audio, 4096, {{0, "A"}, {20000, "B"}});
  auto sink = std::make_shared<memory_sink>(97);
  recorder rec;
  auto s = play(server.stream_url(), sink, rec.fn(), fast_options());
  s->wait();
  EXPECT_EQ(sink->contents(), audio);
  EXPECT_EQ(rec.titles, (std::vector<std::string>{"A", "B"}));
}

TEST(StreamSession, StopIsIdempotentAndPrompt) {
  auto audio = fixture(200000, 7);
  mock_stream_options opts;
  opts.bytes_per_second = 20000;
  mock_stream_server server(audio, 16000, {}, opts);
  auto sink = std::make_shared<memory_sink>();
  recorder rec;
  auto s = play(server.stream_url(), sink, rec.fn(), fast_options());
  std::this_thread::sleep_for(300ms);
  auto t0 = std::chrono::steady_clock::now();
  s->stop();
  s->stop();
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 2s);
  EXPECT_FALSE(s->running());
  auto frozen = sink->size();
  EXPECT_GT(frozen, 0u);
  EXPECT_LT(frozen, audio.size());
  std::this_thread::sleep_for(100ms);
  EXPECT_EQ(sink->size(), frozen);
  // a stopped session reports nothing
  EXPECT_TRUE(rec.errors.empty());
  EXPECT_EQ(rec.ends, 0);
}

TEST(StreamSession, CleanEndDoesNotReconnect) {
  auto audio = fixture(3000, 8);
  mock_stream_server server(audio, 1000, {});
  auto sink = std::make_shared<memory_sink>();
  recorder rec;
  auto opts = fast_options();
  opts.reconnect = true;
  opts.initial_backoff = 50ms;
  auto s = play(server.stream_url(), sink, rec.fn(), opts);
  s->wait();
  std::this_thread::sleep_for(200ms);
  EXPECT_EQ(rec.ends, 1);
  EXPECT_EQ(sink->contents(), audio);
  EXPECT_EQ(server.connections_served(), 1);
}

TEST(MockStreamServer, PlainClientGetsNoMetadata) {
  auto audio = fixture(2000, 9);
  mock_stream_server server(audio, 100, {{0, "X"}});
  auto sock = net::tcp_socket::connect("127.0.0.1", server.port(), 2000ms, nullptr);
  ASSERT_TRUE(sock.write_all("GET /stream HTTP/1.0\r\nHost: x\r\n\r\n", nullptr));
  std::vector<std::uint8_t> body;
  auto head = net::read_response_head(sock, body, 2000ms, nullptr);
  EXPECT_EQ(head.status, 200);
  EXPECT_FALSE(head.header("icy-metaint"));
  std::vector<std::uint8_t> buf(4096);
  while (auto n = sock.read_some(buf, 2000ms, nullptr)) {
    if (*n == 0) break;
    body.insert(body.end(), buf.begin(), buf.begin() + static_cast<long>(*n));
  }
  EXPECT_EQ(body, audio);
}

TEST(MockStreamServer, LayoutMatchesBuilder) {
  auto audio = fixture(65536, 10);
  mock_stream_server server(audio, 16000, {{0, "Hey Jude"}});
  EXPECT_EQ(server.layout().metadata_blocks, 4u);
  std::vector<scheduled_title> schedule = {{0, "Hey Jude"}};
  EXPECT_EQ(server.layout().wire, build_icy_stream(audio, 16000, schedule).wire);
}

TEST(MockStreamServer, ZeroMetaintIsStartupError) {
  try {
    mock_stream_server server(fixture(10, 11), 0, {});
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::startup);
  }
}
