#include "webradio/rf_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "webradio/error.hpp"

namespace webradio {

namespace {

constexpr double kPatternFloor = 1e-2;
constexpr double kPatternPeakDbi = 2.0;
constexpr double kMaxPatternSpreadDb = 60.0;
constexpr double kMinSeparationM = 0.01;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ull;  // "noise"

double normalize_deg(double theta) {
  double t = std::fmod(theta, 360.0);
  if (t < 0.0) t += 360.0;
  // fmod of a tiny negative value can round up to exactly 360
  if (t >= 360.0) t -= 360.0;
  return t;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  // from_chars rejects a leading '+'
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

void antenna_pattern::validate() const {
  for (double g : gains) {
    if (!std::isfinite(g)) throw error(errc::invalid_argument, "pattern gain is not finite");
  }
  auto [lo, hi] = std::minmax_element(gains.begin(), gains.end());
  if (*hi - *lo > kMaxPatternSpreadDb) {
    throw error(errc::invalid_argument, "pattern gain spread exceeds 60 dB");
  }
}

double pattern_gain(const antenna_pattern& pattern, double theta_deg) {
  double t = normalize_deg(theta_deg);
  double base = std::floor(t);
  auto i = static_cast<std::size_t>(base) % kPatternSize;
  double frac = t - base;
  if (frac == 0.0) return pattern.gains[i];
  std::size_t j = (i + 1) % kPatternSize;
  return pattern.gains[i] + frac * (pattern.gains[j] - pattern.gains[i]);
}

antenna_pattern synthetic_pattern(int antenna_id, double boresight_deg) {
  antenna_pattern p;
  p.antenna_id = antenna_id;
  for (int deg = 0; deg < kPatternSize; ++deg) {
    double half = (deg - boresight_deg) / 2.0 * std::numbers::pi / 180.0;
    double amplitude = std::max(std::abs(std::cos(half)), kPatternFloor);
    p.gains[deg] = kPatternPeakDbi + 20.0 * std::log10(amplitude);
  }
  return p;
}

std::vector<antenna_pattern> default_patterns() {
  return {synthetic_pattern(0, 0.0), synthetic_pattern(1, 180.0), synthetic_pattern(2, 90.0)};
}

antenna_pattern load_pattern_csv(std::istream& in, int antenna_id) {
  std::map<double, double> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    auto comma = row.find(',');
    double angle = 0.0;
    double gain = 0.0;
    if (comma == std::string_view::npos || !parse_double(row.substr(0, comma), angle) ||
        !parse_double(row.substr(comma + 1), gain)) {
      throw parse_error(errc::parse, line_no, "expected \"angle_deg,gain_dbi\"");
    }
    angle = normalize_deg(angle);
    if (!samples.emplace(angle, gain).second) {
      throw parse_error(errc::parse, line_no, "duplicate angle");
    }
  }
  if (samples.size() < 2) {
    throw error(errc::insufficient_data, "pattern CSV needs at least 2 distinct angles");
  }

  std::vector<std::pair<double, double>> pts(samples.begin(), samples.end());
  antenna_pattern p;
  p.antenna_id = antenna_id;
  for (int deg = 0; deg < kPatternSize; ++deg) {
    double d = deg;
    // first sample strictly after d, cyclically
    auto next = std::upper_bound(pts.begin(), pts.end(), d,
                                 [](double v, const auto& s) { return v < s.first; });
    auto hi = next == pts.end() ? pts.front() : *next;
    auto lo = next == pts.begin() ? pts.back() : *std::prev(next);
    if (lo.first == d) {
      p.gains[deg] = lo.second;
      continue;
    }
    double span = normalize_deg(hi.first - lo.first);
    if (span == 0.0) span = 360.0;
    double offset = normalize_deg(d - lo.first);
    p.gains[deg] = lo.second + (hi.second - lo.second) * offset / span;
  }
  p.validate();
  return p;
}

antenna_pattern load_pattern_csv(std::string_view text, int antenna_id) {
  std::istringstream in{std::string(text)};
  return load_pattern_csv(in, antenna_id);
}

bssid bssid::parse(std::string_view text) {
  bssid out;
  if (text.size() != 17) throw error(errc::parse, "malformed BSSID: " + std::string(text));
  for (std::size_t i = 0; i < 6; ++i) {
    auto part = text.substr(i * 3, 2);
    if (i < 5 && text[i * 3 + 2] != ':' && text[i * 3 + 2] != '-') {
      throw error(errc::parse, "malformed BSSID: " + std::string(text));
    }
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + 2, value, 16);
    if (ec != std::errc{} || ptr != part.data() + 2) {
      throw error(errc::parse, "malformed BSSID: " + std::string(text));
    }
    out.octets[i] = static_cast<std::uint8_t>(value);
  }
  return out;
}

std::string bssid::to_string() const {
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (std::size_t i = 0; i < octets.size(); ++i) {
    if (i) s += ':';
    s += hex[octets[i] >> 4];
    s += hex[octets[i] & 0xf];
  }
  return s;
}

std::uint64_t bssid::to_u64() const {
  std::uint64_t v = 0;
  for (auto o : octets) v = (v << 8) | o;
  return v;
}

void rf_environment::validate() const {
  if (!(path_loss_exponent >= 1.5 && path_loss_exponent <= 6.0)) {
    throw error(errc::invalid_argument, "path_loss_exponent must lie in [1.5, 6.0]");
  }
  if (!(reference_loss_db > 0.0)) throw error(errc::invalid_argument, "reference_loss must be > 0");
  if (!(shadowing_sigma_db >= 0.0) || !(scan_noise_sigma_db >= 0.0)) {
    throw error(errc::invalid_argument, "sigmas must be >= 0");
  }
  std::vector<webradio::bssid> seen;
  for (const auto& ap : access_points) {
    if (ap.ssid.size() > 32) throw error(errc::invalid_argument, "SSID longer than 32 bytes");
    if (!(ap.tx_power_dbm >= -20.0 && ap.tx_power_dbm <= 30.0)) {
      throw error(errc::invalid_argument, "tx_power must lie in [-20, 30] dBm");
    }
    if (std::find(seen.begin(), seen.end(), ap.bssid) != seen.end()) {
      throw error(errc::invalid_argument, "duplicate BSSID " + ap.bssid.to_string());
    }
    seen.push_back(ap.bssid);
  }
}

double keyed_gaussian(std::uint64_t key) {
  std::uint64_t a = splitmix64(key);
  std::uint64_t b = splitmix64(a);
  // 53-bit uniforms; u1 in (0, 1] keeps the log finite
  double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double scan_context::next_noise() {
  return keyed_gaussian(mix(seed_ ^ kNoiseStream, counter_++));
}

double relative_bearing(const rf_environment& env, const access_point& ap) {
  double dx = ap.position.x - env.device_position.x;
  double dy = ap.position.y - env.device_position.y;
  double bearing = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
  return normalize_deg(bearing - env.device_orientation_deg);
}

int received_power(const rf_environment& env, const antenna_pattern& pattern,
                   const access_point& ap, scan_context& ctx) {
  double d = std::hypot(ap.position.x - env.device_position.x,
                        ap.position.y - env.device_position.y);
  if (d < kMinSeparationM) {
    throw error(errc::geometry, "device and access point " + ap.bssid.to_string() + " coincide");
  }
  double path_loss = env.reference_loss_db + 10.0 * env.path_loss_exponent * std::log10(std::max(d, 1.0));
  double raw = ap.tx_power_dbm + pattern_gain(pattern, relative_bearing(env, ap)) - path_loss;
  if (env.shadowing_sigma_db > 0.0) {
    raw -= env.shadowing_sigma_db * keyed_gaussian(mix(env.seed, ap.bssid.to_u64()));
  }
  if (env.scan_noise_sigma_db > 0.0) raw += env.scan_noise_sigma_db * ctx.next_noise();
  long rounded = std::lround(raw);
  return static_cast<int>(std::clamp<long>(rounded, kRssiMin, kRssiMax));
}

int received_power(const rf_environment& env, const antenna_pattern& pattern,
                   const access_point& ap) {
  scan_context ctx(env.seed);
  return received_power(env, pattern, ap, ctx);
}

std::vector<scan_entry> scan(const rf_environment& env, const antenna_pattern& pattern,
                             scan_context& ctx) {
  std::vector<scan_entry> out;
  out.reserve(env.access_points.size());
  for (const auto& ap : env.access_points) {
    int rssi = received_power(env, pattern, ap, ctx);
    if (rssi < env.sensitivity_floor_dbm) continue;
    out.push_back({ap.ssid, ap.bssid, rssi});
  }
  std::sort(out.begin(), out.end(), [](const scan_entry& a, const scan_entry& b) {
    if (a.rssi != b.rssi) return a.rssi > b.rssi;
    return a.bssid < b.bssid;
  });
  return out;
}

std::vector<scan_entry> scan(const rf_environment& env, const antenna_pattern& pattern) {
  scan_context ctx(env.seed);
  return scan(env, pattern, ctx);
}

}  // namespace webradio
