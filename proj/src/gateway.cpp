#include "webradio/gateway.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "httplib.h"
#include "webradio/error.hpp"

namespace webradio {

namespace {

int http_status_for(errc code) {
  switch (code) {
    case errc::empty_slot:
    case errc::no_stations:
      return 404;
    default:
      return 400;
  }
}

http_reply text_reply(int status, std::string body) {
  return {status, "text/plain", std::move(body)};
}

}  // namespace

std::string_view to_string(gateway_phase phase) {
  switch (phase) {
    case gateway_phase::selecting: return "selecting";
    case gateway_phase::idle: return "idle";
    case gateway_phase::playing: return "playing";
    case gateway_phase::error: return "error";
  }
  return "unknown";
}

std::string_view antenna_indicator(std::size_t best_antenna) {
  static constexpr std::string_view colors[] = {"red", "green", "blue"};
  if (best_antenna >= std::size(colors)) {
    throw error(errc::index, "no indicator color for antenna " + std::to_string(best_antenna));
  }
  return colors[best_antenna];
}

nlohmann::json to_json(const gateway_status& s) {
  using json = nlohmann::json;
  auto opt = [](const auto& v) -> json { return v ? json(*v) : json(nullptr); };

  json rssi = json::array();
  for (const auto& r : s.ant_rssi) rssi.push_back(opt(r));
  json color = nullptr;
  if (s.best_antenna && *s.best_antenna < 3) color = std::string(antenna_indicator(*s.best_antenna));

  return json{
      {"phase", std::string(to_string(s.phase))},
      {"ant_rssi", rssi},
      {"best_antenna", opt(s.best_antenna)},
      {"antenna_color", color},
      {"current_slot", opt(s.current_slot)},
      {"station_url", opt(s.station_url)},
      {"stream_title", opt(s.stream_title)},
      {"ip_address", s.ip_address},
      {"display", json::array({s.display[0], s.display[1], s.display[2]})},
  };
}

gateway::gateway(gateway_config config, log_fn log) : config_(std::move(config)), log_(std::move(log)) {
  config_.validate();
  if (!log_) log_ = [](std::string_view line) { std::clog << line << '\n'; };
  display_.width = config_.display_width;
  status_.ant_rssi.resize(static_cast<std::size_t>(config_.num_antennas));
  status_.ip_address = config_.listen_host;
  refresh_display();
}

gateway::~gateway() { shutdown(); }

int gateway::sessions_started() const { return sessions_started_.load(); }

void gateway::boot() {
  if (booted_) throw error(errc::startup, "gateway already booted");
  booted_ = true;

  if (config_.audio_sink.type == sink_config::kind::file) {
    sink_ = std::make_shared<file_sink>(config_.audio_sink.path);
  } else {
    sink_ = std::make_shared<null_sink>();
  }

  server_ = std::make_unique<httplib::Server>();
  if (!config_.ui_dir.empty()) server_->set_mount_point("/ui", config_.ui_dir.string());
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    auto reply = handle_request(req.method, req.target);
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  };
  server_->Get(".*", dispatch);
  server_->Post(".*", dispatch);
  if (config_.listen_port == 0) {
    int port = server_->bind_to_any_port(config_.listen_host);
    if (port <= 0) throw error(errc::startup, "cannot bind " + config_.listen_address());
    bound_port_ = static_cast<std::uint16_t>(port);
  } else {
    if (!server_->bind_to_port(config_.listen_host, config_.listen_port)) {
      throw error(errc::startup, "cannot bind " + config_.listen_address());
    }
    bound_port_ = config_.listen_port;
  }

  select_antenna();

  preset_store loaded;
  if (std::filesystem::exists(config_.presets_file)) {
    std::ifstream in(config_.presets_file, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    loaded = load_store(ss.str());
  }
  {
    std::lock_guard lock(state_mutex_);
    store_ = loaded;
  }
  start_playback();

  if (config_.display_tick.count() > 0) ticker_thread_ = std::thread([this] { ticker_loop(); });
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  log_("listening on " + config_.listen_host + ":" + std::to_string(bound_port_));
}

void gateway::shutdown() {
  {
    std::lock_guard lock(ticker_mutex_);
    stopping_ = true;
  }
  ticker_cv_.notify_all();
  if (ticker_thread_.joinable()) ticker_thread_.join();
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
  stop_playback();
}

void gateway::select_antenna() {
  {
    std::lock_guard lock(state_mutex_);
    status_.phase = gateway_phase::selecting;
    status_.best_antenna.reset();
    refresh_display();
  }
  selector_config sel{config_.target_ssid, config_.num_antennas, config_.retries_per_antenna};
  try {
    auto result = run_selection(simulated_scanner(config_.environment, config_.patterns), sel, log_);
    std::lock_guard lock(state_mutex_);
    status_.ant_rssi = result.ant_rssi;
    status_.best_antenna = result.best_antenna;
    status_.phase = gateway_phase::idle;
    refresh_display();
  } catch (const selection_failed_error& e) {
    log_(std::string("antenna selection failed: ") + e.what());
    std::lock_guard lock(state_mutex_);
    status_.ant_rssi = e.ant_rssi();
    status_.phase = gateway_phase::error;
    refresh_display();
  }
}

void gateway::start_playback() {
  std::lock_guard playback(playback_mutex_);
  if (session_) {
    auto old = std::move(session_);
    old->stop();
  }
  std::optional<std::string> url;
  std::uint64_t generation = 0;
  {
    std::lock_guard lock(state_mutex_);
    generation = ++generation_;
    status_.stream_title.reset();
    status_.station_url = store_.slots[store_.current];
    if (status_.phase != gateway_phase::error && status_.best_antenna) {
      url = status_.station_url;
      status_.phase = url ? gateway_phase::playing : gateway_phase::idle;
    }
    refresh_display();
  }
  if (!url) return;
  log_("playing " + *url);
  session_ = play(*url, sink_, [this, generation](stream_event ev) { on_stream_event(generation, ev); },
                  config_.stream);
  ++sessions_started_;
}

void gateway::stop_playback() {
  std::lock_guard playback(playback_mutex_);
  if (session_) {
    auto old = std::move(session_);
    old->stop();
  }
  std::lock_guard lock(state_mutex_);
  ++generation_;
  if (status_.phase == gateway_phase::playing) status_.phase = gateway_phase::idle;
  refresh_display();
}

void gateway::on_stream_event(std::uint64_t generation, const stream_event& ev) {
  std::string note;
  {
    std::lock_guard lock(state_mutex_);
    if (generation != generation_) return;
    if (auto* t = std::get_if<event::title_change>(&ev)) {
      status_.stream_title = t->title;
      note = "title: " + t->title;
      refresh_display();
    } else if (auto* e = std::get_if<event::transport_error>(&ev)) {
      note = "stream error: " + e->reason;
    } else if (std::holds_alternative<event::end_of_stream>(ev)) {
      note = "end of stream";
    }
  }
  if (!note.empty()) log_(note);
}

void gateway::persist(const preset_store& store) {
  const auto& path = config_.presets_file;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << save_store(store);
    if (!out) throw error(errc::startup, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void gateway::refresh_display() {
  std::string first;
  switch (status_.phase) {
    case gateway_phase::selecting:
      first = "Scanning " + config_.target_ssid;
      break;
    case gateway_phase::error:
      first = "No signal: " + config_.target_ssid;
      break;
    case gateway_phase::idle:
    case gateway_phase::playing:
      if (status_.best_antenna) {
        first = "ANT#" + std::to_string(*status_.best_antenna + 1);
        if (auto r = status_.ant_rssi[*status_.best_antenna]) first += " " + std::to_string(*r) + "dBm";
      }
      if (status_.stream_title) first += " " + *status_.stream_title;
      break;
  }
  display_.set_line(0, first);
  display_.set_line(1, status_.station_url.value_or(""));
  display_.set_line(2, status_.ip_address);
  status_.display = display_.render();
}

void gateway::tick_display() {
  std::lock_guard lock(state_mutex_);
  display_ = display_tick(std::move(display_));
  status_.display = display_.render();
}

void gateway::ticker_loop() {
  std::unique_lock lock(ticker_mutex_);
  while (!ticker_cv_.wait_for(lock, config_.display_tick, [this] { return stopping_; })) {
    tick_display();
  }
}

gateway_status gateway::status() const {
  std::lock_guard lock(state_mutex_);
  gateway_status s = status_;
  s.current_slot = store_.empty() ? std::nullopt : std::optional<int>(store_.current);
  return s;
}

preset_store gateway::store() const {
  std::lock_guard lock(state_mutex_);
  return store_;
}

void gateway::rescan() {
  std::lock_guard commands(command_mutex_);
  stop_playback();
  select_antenna();
  start_playback();
}

http_reply gateway::handle_request(std::string_view method, std::string_view target) {
  std::string_view path = target.substr(0, target.find('?'));
  if (path == "/api/status") {
    if (method != "GET") return text_reply(405, "method not allowed\n");
    return {200, "application/json", to_json(status()).dump()};
  }
  if (path == "/api/rescan") {
    if (method != "POST") return text_reply(405, "method not allowed\n");
    rescan();
    return {200, "application/json", to_json(status()).dump()};
  }
  if (path == "/api" || path.starts_with("/api/") || path == "/ui" || path.starts_with("/ui/")) {
    return text_reply(404, "not found\n");
  }
  if (method != "GET") return text_reply(405, "method not allowed\n");

  command cmd;
  try {
    cmd = parse_command(target);
  } catch (const error& e) {
    return text_reply(400, std::string(to_string(e.code())) + ": " + e.what() + "\n");
  }

  std::lock_guard commands(command_mutex_);
  preset_store before;
  preset_store after;
  command_response resp;
  bool restart = false;
  {
    std::lock_guard lock(state_mutex_);
    before = store_;
    auto [next, r] = webradio::apply(store_, cmd);
    resp = std::move(r);
    if (resp.ok()) store_ = std::move(next);
    after = store_;
    restart = resp.station_changed.has_value() || after.slots[after.current] != status_.station_url;
  }
  if (!resp.ok()) {
    errc code = resp.error_code.value_or(errc::unknown_command);
    return text_reply(http_status_for(code), std::string(to_string(code)) + ": " + resp.body + "\n");
  }
  if (after != before) persist(after);
  if (restart) start_playback();
  return text_reply(200, resp.body);
}

}  // namespace webradio
