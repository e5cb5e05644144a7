#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "webradio/error.hpp"
#include "webradio/rf_model.hpp"

using namespace webradio;

namespace {

// Closed form of the synthetic pattern, written out independently of the
// table-building code.
double oracle_gain(double theta, double boresight) {
  const double pi = std::acos(-1.0);
  double c = std::fabs(std::cos((theta - boresight) * pi / 360.0));
  if (c < 0.01) c = 0.01;
  return 2.0 + 20.0 * std::log10(c);
}

antenna_pattern isotropic(double gain = 0.0) {
  antenna_pattern p;
  p.gains.fill(gain);
  return p;
}

access_point make_ap(std::string ssid, std::uint8_t last, point pos, double tx) {
  access_point ap;
  ap.ssid = std::move(ssid);
  ap.bssid.octets = {0x02, 0, 0, 0, 0, last};
  ap.position = pos;
  ap.tx_power_dbm = tx;
  return ap;
}

}  // namespace

TEST(PatternGain, DefaultPatternBoresightAndNull) {
  auto p = default_patterns();
  ASSERT_EQ(p.size(), 3u);
  EXPECT_DOUBLE_EQ(pattern_gain(p[0], 0.0), 2.0);
  EXPECT_NEAR(pattern_gain(p[0], 180.0), -38.0, 1e-12);
  // 2 + 20 log10 cos 45deg
  EXPECT_NEAR(pattern_gain(p[2], 0.0), -1.0102999566398125, 1e-9);
  EXPECT_NEAR(pattern_gain(p[2], 0.0), -1.0, 0.02);
}

TEST(PatternGain, NormalizesModulo360) {
  auto p = default_patterns()[2];
  EXPECT_DOUBLE_EQ(pattern_gain(p, 725.0), pattern_gain(p, 5.0));
  EXPECT_DOUBLE_EQ(pattern_gain(p, -355.0), pattern_gain(p, 5.0));
  EXPECT_DOUBLE_EQ(pattern_gain(p, 360.0), p.gains[0]);
}

TEST(PatternGain, IntegerDegreesHitTableExactly) {
  const double boresights[] = {0.0, 180.0, 90.0};
  for (const auto& p : default_patterns()) {
    for (int deg = 0; deg < 360; ++deg) {
      ASSERT_EQ(pattern_gain(p, deg), p.gains[deg]);
      ASSERT_NEAR(p.gains[deg], oracle_gain(deg, boresights[p.antenna_id]), 1e-12);
    }
  }
}

TEST(PatternGain, InterpolatesAndWraps) {
  antenna_pattern p = isotropic();
  p.gains[359] = -10.0;
  p.gains[0] = 10.0;
  p.gains[10] = 4.0;
  p.gains[11] = 8.0;
  EXPECT_DOUBLE_EQ(pattern_gain(p, 10.25), 5.0);
  EXPECT_DOUBLE_EQ(pattern_gain(p, 359.5), 0.0);
  EXPECT_DOUBLE_EQ(pattern_gain(p, -0.5), 0.0);
}

TEST(DefaultPatterns, NullPlacement) {
  auto p = default_patterns();
  auto argmin = [](const antenna_pattern& pat) {
    return std::min_element(pat.gains.begin(), pat.gains.end()) - pat.gains.begin();
  };
  // the -38 dBi floor flattens the null over a few degrees
  EXPECT_NEAR(argmin(p[0]), 180, 1);
  EXPECT_NEAR(argmin(p[1]), 0, 1);
  EXPECT_DOUBLE_EQ(p[0].gains[180], -38.0);
  EXPECT_DOUBLE_EQ(p[1].gains[0], -38.0);
  double peak2 = *std::max_element(p[2].gains.begin(), p[2].gains.end());
  EXPECT_GE(p[2].gains[0], peak2 - 5.0);
  EXPECT_GE(p[2].gains[180], peak2 - 5.0);
  for (const auto& pat : p) EXPECT_NO_THROW(pat.validate());
}

TEST(DefaultPatterns, NullComplementarityOnFineSweep) {
  auto p = default_patterns();
  for (int tenth = 0; tenth < 3600; ++tenth) {
    double theta = tenth / 10.0;
    double best = std::max({pattern_gain(p[0], theta), pattern_gain(p[1], theta), pattern_gain(p[2], theta)});
    ASSERT_GE(best, 2.0 - 5.0) << theta;
  }
}

TEST(PatternCsv, ConstantFill) {
  auto p = load_pattern_csv("0,2\n120,2\n240,2");
  for (double g : p.gains) EXPECT_DOUBLE_EQ(g, 2.0);
}

TEST(PatternCsv, LinearInterpolationWithWrap) {
  auto p = load_pattern_csv("0,0\n180,-30\n");
  EXPECT_DOUBLE_EQ(p.gains[90], -15.0);
  EXPECT_DOUBLE_EQ(p.gains[270], -15.0);
  EXPECT_DOUBLE_EQ(p.gains[180], -30.0);
  EXPECT_DOUBLE_EQ(p.gains[45], -7.5);
}

TEST(PatternCsv, SparseUnsortedAnglesWrapAcrossZero) {
  auto p = load_pattern_csv("# measured\n350,-10\n10,10\n180,0\n");
  EXPECT_DOUBLE_EQ(p.gains[0], 0.0);
  EXPECT_DOUBLE_EQ(p.gains[355], -5.0);
  EXPECT_DOUBLE_EQ(p.gains[5], 5.0);
}

TEST(PatternCsv, MalformedRowReportsLine) {
  try {
    load_pattern_csv("0,abc");
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_EQ(e.code(), errc::parse);
    EXPECT_EQ(e.line(), 1u);
  }
  try {
    load_pattern_csv("0,1\n90,2\n180 2\n");
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(PatternCsv, InsufficientData) {
  try {
    load_pattern_csv("0,1\n");
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::insufficient_data);
  }
  EXPECT_THROW(load_pattern_csv(""), error);
}

TEST(PatternCsv, RejectsExcessiveSpread) {
  EXPECT_THROW(load_pattern_csv("0,10\n180,-60\n"), error);
}

TEST(ReceivedPower, BoresightExample) {
  rf_environment env;
  auto ap = make_ap("mynet", 1, {10, 0}, 20);
  env.access_points = {ap};
  auto p = default_patterns();
  // 20 + 2 - (40.2 + 20 log10 10) = -38.2
  EXPECT_EQ(received_power(env, p[0], ap), -38);
  // 20 - 38 - 60.2 = -78.2
  EXPECT_EQ(received_power(env, p[1], ap), -78);
}

TEST(ReceivedPower, ReferenceLossOnly) {
  rf_environment env;
  auto ap = make_ap("x", 1, {1, 0}, 0);
  EXPECT_EQ(received_power(env, isotropic(), ap), -40);
  // inside 1 m the distance term is clamped at zero
  ap.position = {0.5, 0};
  EXPECT_EQ(received_power(env, isotropic(), ap), -40);
}

TEST(ReceivedPower, CoincidentPositionsAreAGeometryError) {
  rf_environment env;
  auto ap = make_ap("x", 1, {0.005, 0}, 0);
  try {
    received_power(env, isotropic(), ap);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::geometry);
  }
}

TEST(ReceivedPower, ClampsToRssiRange) {
  rf_environment env;
  auto near = make_ap("x", 1, {1, 0}, 30);
  antenna_pattern hot = isotropic(20.0);
  // 30 + 20 - 40.2 = +9.8 dBm, clamped
  EXPECT_EQ(received_power(env, hot, near), 0);
  auto far = make_ap("x", 2, {1e9, 0}, -20);
  EXPECT_EQ(received_power(env, isotropic(), far), -127);
}

TEST(ReceivedPower, MonotoneInDistance) {
  rf_environment env;
  env.path_loss_exponent = 3.1;
  auto p = default_patterns()[2];
  int prev = 0;
  for (double d = 1.0; d < 2000.0; d *= 1.07) {
    auto ap = make_ap("x", 1, {d * std::cos(0.3), d * std::sin(0.3)}, 15);
    int r = received_power(env, p, ap);
    ASSERT_LE(r, prev);
    prev = r;
  }
}

TEST(ReceivedPower, RotationCovariance) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-50, 50), angle(0, 360);
  auto patterns = default_patterns();
  const double pi = std::acos(-1.0);
  for (int trial = 0; trial < 200; ++trial) {
    rf_environment env;
    env.device_orientation_deg = angle(rng);
    env.shadowing_sigma_db = 4.0;
    env.seed = trial;
    auto ap = make_ap("x", 3, {coord(rng), coord(rng)}, 10);
    if (std::hypot(ap.position.x, ap.position.y) < 1.0) continue;
    env.access_points = {ap};

    double delta = angle(rng);
    rf_environment rotated = env;
    rotated.device_orientation_deg += delta;
    double c = std::cos(delta * pi / 180), s = std::sin(delta * pi / 180);
    rotated.access_points[0].position = {c * ap.position.x - s * ap.position.y,
                                         s * ap.position.x + c * ap.position.y};
    for (const auto& p : patterns) {
      // bearings are equal up to float noise; allow the interpolated gain to
      // straddle a rounding boundary by at most 1 dB
      int a = received_power(env, p, env.access_points[0]);
      int b = received_power(rotated, p, rotated.access_points[0]);
      ASSERT_LE(std::abs(a - b), 1) << trial;
      double diff = relative_bearing(env, env.access_points[0]) -
                    relative_bearing(rotated, rotated.access_points[0]);
      ASSERT_NEAR(std::fmod(diff + 540.0, 360.0) - 180.0, 0.0, 1e-6);
    }
  }
}

TEST(ReceivedPower, QuarterTurnRotationIsExact) {
  auto patterns = default_patterns();
  for (int trial = 0; trial < 100; ++trial) {
    rf_environment env;
    env.device_orientation_deg = trial * 3.7;
    auto ap = make_ap("x", 3, {trial - 50.0, 17.0 - trial * 0.3}, 10);
    env.access_points = {ap};
    rf_environment rotated = env;
    rotated.device_orientation_deg += 90.0;
    rotated.access_points[0].position = {-ap.position.y, ap.position.x};
    for (const auto& p : patterns) {
      ASSERT_EQ(received_power(env, p, env.access_points[0]),
                received_power(rotated, p, rotated.access_points[0]));
    }
  }
}

TEST(Scan, EmptyEnvironment) {
  rf_environment env;
  EXPECT_TRUE(scan(env, default_patterns()[0]).empty());
}

TEST(Scan, SortedDescendingWithBssidTieBreak) {
  rf_environment env;
  env.access_points = {make_ap("b", 9, {-10, 0}, 20), make_ap("a", 1, {10, 0}, 20),
                       make_ap("tie", 2, {-10, 0.0001}, 20)};
  auto s = scan(env, default_patterns()[0]);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].rssi, -38);
  EXPECT_EQ(s[1].rssi, -78);
  EXPECT_EQ(s[2].rssi, -78);
  EXPECT_EQ(s[1].bssid.octets[5], 2);
  EXPECT_EQ(s[2].bssid.octets[5], 9);
}

TEST(Scan, DropsEntriesBelowSensitivityFloor) {
  rf_environment env;
  // -40.2 - 20 log10(3090) = -109.999
  auto weak = make_ap("weak", 1, {3090, 0}, 0);
  env.access_points = {weak, make_ap("strong", 2, {5, 0}, 0)};
  ASSERT_EQ(received_power(env, isotropic(), weak), -110);
  auto s = scan(env, isotropic());
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].ssid, "strong");
}

TEST(Scan, DeterministicWithNoiseAndShadowing) {
  rf_environment env;
  env.shadowing_sigma_db = 6;
  env.scan_noise_sigma_db = 3;
  env.seed = 0xfeedbeef;
  for (std::uint8_t i = 1; i <= 8; ++i) env.access_points.push_back(make_ap("n", i, {i * 7.0, 3.0 - i}, 10));
  auto p = default_patterns()[1];
  EXPECT_EQ(scan(env, p), scan(env, p));

  scan_context ctx(env.seed);
  auto first = scan(env, p, ctx);
  auto second = scan(env, p, ctx);
  EXPECT_EQ(ctx.calls(), 16u);
  EXPECT_NE(first, second);  // per-scan noise differs between retries
}

TEST(Scan, ShadowingIsPerLinkNotPerScan) {
  rf_environment env;
  env.shadowing_sigma_db = 8;
  env.seed = 42;
  auto ap = make_ap("n", 1, {20, 0}, 10);
  env.access_points = {ap};
  scan_context ctx(env.seed);
  int a = received_power(env, isotropic(), ap, ctx);
  int b = received_power(env, isotropic(), ap, ctx);
  EXPECT_EQ(a, b);
  rf_environment other = env;
  other.seed = 43;
  int spread = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    other.seed = s;
    spread += received_power(other, isotropic(), ap) != a;
  }
  EXPECT_GT(spread, 0);
}

TEST(KeyedGaussian, StandardMoments) {
  double sum = 0, sq = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    double g = keyed_gaussian(static_cast<std::uint64_t>(i));
    sum += g;
    sq += g * g;
  }
  double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.03);
  EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.03);
}

TEST(Environment, ValidationRejectsBadParameters) {
  rf_environment env;
  env.path_loss_exponent = 1.0;
  EXPECT_THROW(env.validate(), error);
  env = {};
  env.reference_loss_db = 0;
  EXPECT_THROW(env.validate(), error);
  env = {};
  env.access_points = {make_ap("a", 1, {1, 1}, 20), make_ap("b", 1, {2, 2}, 20)};
  EXPECT_THROW(env.validate(), error);
  env.access_points = {make_ap("a", 1, {1, 1}, 31)};
  EXPECT_THROW(env.validate(), error);
  env.access_points = {make_ap(std::string(33, 'x'), 1, {1, 1}, 0)};
  EXPECT_THROW(env.validate(), error);
}

TEST(Bssid, ParsesAndPrints) {
  auto b = bssid::parse("02:AB:cd:00:10:ff");
  EXPECT_EQ(b.to_string(), "02:ab:cd:00:10:ff");
  EXPECT_THROW(bssid::parse("02:ab:cd:00:10"), error);
  EXPECT_THROW(bssid::parse("02:ab:cd:00:10:zz"), error);
}
