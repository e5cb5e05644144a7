// webradio: command-line front end for the adaptive-antenna web radio gateway.

#include <csignal>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "webradio/antenna_selector.hpp"
#include "webradio/config.hpp"
#include "webradio/error.hpp"
#include "webradio/gateway.hpp"
#include "webradio/mock_stream_server.hpp"
#include "webradio/preset_protocol.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

void wait_for_signal() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

std::string describe(const webradio::command& c) {
  using namespace webradio;
  struct visitor {
    std::string operator()(const cmd::list&) const { return "list"; }
    std::string operator()(const cmd::prev&) const { return "prev"; }
    std::string operator()(const cmd::next&) const { return "next"; }
    std::string operator()(const cmd::select& s) const { return "select " + std::to_string(s.slot); }
    std::string operator()(const cmd::set& s) const { return "set " + std::to_string(s.slot) + " " + s.url; }
    std::string operator()(const cmd::remove& r) const {
      return "remove " + std::to_string(r.slot) + (r.url ? " " + *r.url : "");
    }
  };
  return std::visit(visitor{}, c);
}

void print_table(const webradio::rssi_table& table) {
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::cout << "antenna #" << i + 1 << ": ";
    if (table[i]) {
      std::cout << *table[i] << " dBm\n";
    } else {
      std::cout << "not seen\n";
    }
  }
}

int run_select(const std::string& config_path) {
  auto cfg = webradio::load_config(config_path);
  webradio::selector_config sel{cfg.target_ssid, cfg.num_antennas, cfg.retries_per_antenna};
  auto log = [](std::string_view line) { std::cout << line << '\n'; };
  try {
    auto result = webradio::run_selection(webradio::simulated_scanner(cfg.environment, cfg.patterns), sel, log);
    print_table(result.ant_rssi);
    std::cout << "scans: " << result.attempts << '\n';
    return 0;
  } catch (const webradio::selection_failed_error& e) {
    print_table(e.ant_rssi());
    std::cerr << "selection failed: " << e.what() << '\n';
    return 1;
  }
}

int run_scan(const std::string& config_path, int antenna) {
  auto cfg = webradio::load_config(config_path);
  if (antenna < 0 || static_cast<std::size_t>(antenna) >= cfg.patterns.size()) {
    std::cerr << "antenna index out of range (0-" << cfg.patterns.size() - 1 << ")\n";
    return 2;
  }
  for (const auto& e : webradio::scan(cfg.environment, cfg.patterns[static_cast<std::size_t>(antenna)])) {
    std::cout << e.bssid.to_string() << '\t' << e.rssi << '\t' << e.ssid << '\n';
  }
  return 0;
}

int run_serve(const std::string& config_path) {
  auto cfg = webradio::load_config(config_path);
  webradio::gateway gw(cfg, [](std::string_view line) { std::cout << line << std::endl; });
  gw.boot();
  wait_for_signal();
  gw.shutdown();
  return 0;
}

int run_mock(const std::string& file, std::size_t metaint, const std::vector<std::string>& titles,
             const std::string& host, std::uint16_t port, std::size_t rate) {
  std::vector<webradio::scheduled_title> schedule;
  for (const auto& t : titles) {
    auto at = t.find('@');
    if (at == std::string::npos) {
      schedule.push_back({0, t});
    } else {
      schedule.push_back({std::stoul(t.substr(at + 1)), t.substr(0, at)});
    }
  }
  webradio::mock_stream_options opts;
  opts.host = host;
  opts.port = port;
  opts.bytes_per_second = rate;
  auto server = webradio::serve_mock_stream(file, metaint, schedule, opts);
  std::cout << server->stream_url() << std::endl;
  wait_for_signal();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-antenna web radio gateway"};
  app.require_subcommand(1);

  std::string config_path;
  auto* serve = app.add_subcommand("serve", "Boot the gateway and serve the control plane");
  serve->add_option("--config", config_path, "Gateway JSON config")->required()->check(CLI::ExistingFile);

  auto* select = app.add_subcommand("select", "Run antenna selection once and print the RSSI table");
  select->add_option("--config", config_path, "Gateway JSON config")->required()->check(CLI::ExistingFile);

  std::string path;
  auto* parse = app.add_subcommand("parse-cmd", "Parse a station command path");
  parse->add_option("path", path, "Request path, e.g. /1+http://host/stream.mp3")->required();

  int antenna = 0;
  auto* scan = app.add_subcommand("scan", "Print the simulated scan list for one antenna");
  scan->add_option("--config", config_path, "Gateway JSON config")->required()->check(CLI::ExistingFile);
  scan->add_option("--antenna", antenna, "Antenna index (0-based)")->required();

  std::string audio_file;
  std::size_t metaint = 16000;
  std::vector<std::string> titles;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::size_t rate = 16000;
  auto* mock = app.add_subcommand("mock-stream", "Serve a file as an ICY stream");
  mock->add_option("file", audio_file, "Audio file")->required()->check(CLI::ExistingFile);
  mock->add_option("--metaint", metaint, "Audio bytes between metadata blocks");
  mock->add_option("--title", titles, "Title, optionally TITLE@OFFSET; repeatable");
  mock->add_option("--host", host, "Bind address");
  mock->add_option("--port", port, "Port (0 = ephemeral)");
  mock->add_option("--rate", rate, "Bytes per second (0 = unthrottled)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return run_serve(config_path);
    if (*select) return run_select(config_path);
    if (*scan) return run_scan(config_path, antenna);
    if (*mock) return run_mock(audio_file, metaint, titles, host, port, rate);
    if (*parse) {
      try {
        std::cout << describe(webradio::parse_command(path)) << '\n';
        return 0;
      } catch (const webradio::error& e) {
        std::cerr << webradio::to_string(e.code()) << ": " << e.what() << '\n';
        return 1;
      }
    }
  } catch (const webradio::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
