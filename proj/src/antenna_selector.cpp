#include "webradio/antenna_selector.hpp"

#include <memory>

#include "webradio/error.hpp"

namespace webradio {

void selector_config::validate() const {
  if (num_antennas < 1) throw error(errc::invalid_argument, "num_antennas must be >= 1");
  if (retries_per_antenna < 1) throw error(errc::invalid_argument, "retries_per_antenna must be >= 1");
}

selector_state record_scan(selector_state state, std::size_t antenna,
                           std::span<const scan_entry> entries, std::string_view target_ssid) {
  if (antenna >= state.ant_rssi.size()) {
    throw error(errc::index, "antenna " + std::to_string(antenna) + " out of range");
  }
  state.current_antenna = antenna;
  std::optional<int> best;
  for (const auto& e : entries) {
    if (e.ssid != target_ssid) continue;
    if (!best || e.rssi > *best) best = e.rssi;
  }
  if (best) state.ant_rssi[antenna] = best;
  return state;
}

std::size_t best_antenna(std::span<const std::optional<int>> ant_rssi) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < ant_rssi.size(); ++i) {
    if (!ant_rssi[i]) continue;
    if (!best || *ant_rssi[i] > *ant_rssi[*best]) best = i;
  }
  if (!best) throw error(errc::no_signal, "no antenna has a reading for the target SSID");
  return *best;
}

selection_result run_selection(const scan_provider& scanner, const selector_config& config,
                               const log_fn& log) {
  config.validate();
  auto n = static_cast<std::size_t>(config.num_antennas);
  selector_state state(n);
  int attempts = 0;

  for (std::size_t antenna = 0; antenna < n; ++antenna) {
    for (int retry = 0; retry < config.retries_per_antenna; ++retry) {
      auto entries = scanner(antenna);
      ++attempts;
      state = record_scan(std::move(state), antenna, entries, config.target_ssid);
      if (state.ant_rssi[antenna]) {
        if (log) log("rssi: " + std::to_string(*state.ant_rssi[antenna]));
        break;
      }
    }
  }

  std::size_t best = 0;
  try {
    best = best_antenna(state.ant_rssi);
  } catch (const error&) {
    throw selection_failed_error(state.ant_rssi, attempts);
  }
  state.phase = selector_phase::selected;
  state.current_antenna = best;
  if (log) log("best antenna: " + std::to_string(best + 1));
  return {best, std::move(state.ant_rssi), attempts};
}

scan_provider simulated_scanner(const rf_environment& env, std::vector<antenna_pattern> patterns) {
  auto ctx = std::make_shared<scan_context>(env.seed);
  return [env, patterns = std::move(patterns), ctx](std::size_t antenna) {
    if (antenna >= patterns.size()) {
      throw error(errc::index, "antenna " + std::to_string(antenna) + " out of range");
    }
    return scan(env, patterns[antenna], *ctx);
  };
}

}  // namespace webradio
