#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace webradio {

inline constexpr int kPatternSize = 360;
inline constexpr int kRssiMin = -127;
inline constexpr int kRssiMax = 0;

// Azimuthal gain table of one switchable antenna, one entry per integer degree.
struct antenna_pattern {
  int antenna_id = 0;
  std::array<double, kPatternSize> gains{};

  // Throws error(invalid_argument) on non-finite entries or a spread above 60 dB.
  void validate() const;
};

// Gain in dBi at an arbitrary azimuth; linear interpolation between integer
// degrees, wrapping 359 -> 0.
double pattern_gain(const antenna_pattern& pattern, double theta_deg);

// 2 + 20 log10(max(|cos((theta - boresight) / 2)|, 0.01)) sampled at 1 degree.
antenna_pattern synthetic_pattern(int antenna_id, double boresight_deg);

// Three complementary patterns with boresights 0, 180 and 90 degrees.
std::vector<antenna_pattern> default_patterns();

// Rows "angle_deg,gain_dbi". Sparse angles are filled by wrapped linear
// interpolation.
antenna_pattern load_pattern_csv(std::istream& in, int antenna_id = 0);
antenna_pattern load_pattern_csv(std::string_view text, int antenna_id = 0);

struct bssid {
  std::array<std::uint8_t, 6> octets{};

  static bssid parse(std::string_view text);  // "aa:bb:cc:dd:ee:ff"
  std::string to_string() const;
  std::uint64_t to_u64() const;

  auto operator<=>(const bssid&) const = default;
};

struct point {
  double x = 0.0;
  double y = 0.0;
};

struct access_point {
  std::string ssid;
  webradio::bssid bssid;
  point position;
  double tx_power_dbm = 20.0;
};

struct rf_environment {
  std::vector<access_point> access_points;
  point device_position;
  double device_orientation_deg = 0.0;
  double path_loss_exponent = 2.0;
  double reference_loss_db = 40.2;
  double shadowing_sigma_db = 0.0;
  double scan_noise_sigma_db = 0.0;
  std::uint64_t seed = 0;
  int sensitivity_floor_dbm = -100;

  void validate() const;
};

struct scan_entry {
  std::string ssid;
  webradio::bssid bssid;
  int rssi = kRssiMin;

  bool operator==(const scan_entry&) const = default;
};

// Holds the per-call scan-noise counter. One context per thread.
class scan_context {
public:
  explicit scan_context(std::uint64_t seed) : seed_(seed) {}
  // Standard normal draw keyed on (seed, call counter).
  double next_noise();
  std::uint64_t calls() const { return counter_; }

private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

// Zero-mean unit Gaussian derived from a 64-bit key; identical on every platform.
double keyed_gaussian(std::uint64_t key);

// Bearing from the device to `ap` relative to device orientation, in [0, 360).
double relative_bearing(const rf_environment& env, const access_point& ap);

// Integer dBm, clamped to [-127, 0]. Throws error(geometry) when the device and
// AP are closer than 1 cm.
int received_power(const rf_environment& env, const antenna_pattern& pattern,
                   const access_point& ap, scan_context& ctx);
int received_power(const rf_environment& env, const antenna_pattern& pattern,
                   const access_point& ap);

// Sorted by rssi descending then bssid ascending; entries under the
// sensitivity floor are dropped.
std::vector<scan_entry> scan(const rf_environment& env, const antenna_pattern& pattern,
                             scan_context& ctx);
std::vector<scan_entry> scan(const rf_environment& env, const antenna_pattern& pattern);

}  // namespace webradio
