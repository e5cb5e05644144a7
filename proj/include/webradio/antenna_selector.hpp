#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "webradio/rf_model.hpp"

namespace webradio {

using rssi_table = std::vector<std::optional<int>>;

struct selector_config {
  std::string target_ssid;
  int num_antennas = 3;
  int retries_per_antenna = 3;
  static constexpr int missing_rssi_sentinel = kRssiMin;

  void validate() const;
};

enum class selector_phase { scanning, selected };

// The ant_rssi[n] table of the boot-time selection loop.
struct selector_state {
  rssi_table ant_rssi;
  std::size_t current_antenna = 0;
  selector_phase phase = selector_phase::scanning;

  explicit selector_state(std::size_t num_antennas) : ant_rssi(num_antennas) {}
  bool operator==(const selector_state&) const = default;
};

struct selection_result {
  std::size_t best_antenna = 0;
  rssi_table ant_rssi;
  int attempts = 0;
};

// Stores the strongest RSSI among entries whose SSID equals target_ssid
// byte-for-byte. Leaves the slot untouched when nothing matches.
selector_state record_scan(selector_state state, std::size_t antenna,
                           std::span<const scan_entry> entries, std::string_view target_ssid);

// Index of the maximum present entry, lowest index on ties.
// Throws error(no_signal) when every entry is absent.
std::size_t best_antenna(std::span<const std::optional<int>> ant_rssi);

using scan_provider = std::function<std::vector<scan_entry>(std::size_t antenna)>;
using log_fn = std::function<void(std::string_view)>;

// Sweeps every antenna with up to retries_per_antenna scans each (stopping
// early on a sighting), then picks the best one. Logs "rssi: <n>" per sighting
// and "best antenna: <n+1>" at the end.
// Throws selection_failed_error when the target never shows up.
selection_result run_selection(const scan_provider& scanner, const selector_config& config,
                               const log_fn& log = {});

// Adapter: scan the simulated environment through the given patterns. Keeps a
// single scan_context so scan noise differs between retries.
scan_provider simulated_scanner(const rf_environment& env, std::vector<antenna_pattern> patterns);

}  // namespace webradio
