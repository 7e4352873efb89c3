#include <gtest/gtest.h>

#include <cmath>

#include "uavplan/channel.hpp"

using namespace uavplan;

TEST(AntennaGain, Examples) {
  EXPECT_NEAR(antenna_gain_db({150.0, 200.0}), 0.0, 1e-12);
  // 10 log10(30000 / 900), evaluated independently.
  EXPECT_NEAR(antenna_gain_db({30.0, 30.0}), 15.228787452803376, 1e-9);
}

TEST(Fspl, Examples) {
  // 20 log10(4 pi 1000 2e9 / c), evaluated independently.
  EXPECT_NEAR(fspl_db(1000.0, 2e9), 98.468383135163, 1e-9);
  EXPECT_NEAR(fspl_db(2000.0, 2e9) - fspl_db(1000.0, 2e9), 20.0 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(fspl_db(kSpeedOfLight / (4.0 * std::numbers::pi * 2e9), 2e9), 0.0, 1e-12);
  EXPECT_THROW(fspl_db(0.0, 2e9), InvalidArgument);
  EXPECT_THROW(fspl_db(-3.0, 2e9), InvalidArgument);
}

TEST(LosProbability, Examples) {
  const auto urban = Environment::urban();
  EXPECT_NEAR(los_probability(100.0, 0.0, urban), 1.0, 1e-2);
  const double at_floor = los_probability(std::tan(std::numbers::pi / 12.0), 1.0, urban);
  EXPECT_GT(at_floor, 0.0);
  EXPECT_LT(at_floor, 1.0);
  // 1 / (1 + 9.61 exp(-0.16 (45 - 9.61))), evaluated independently.
  EXPECT_NEAR(los_probability(250.0, 250.0, urban), 0.9676918999472423, 1e-12);
  EXPECT_THROW(los_probability(0.0, 10.0, urban), InvalidArgument);
}

TEST(LosProbability, MonotoneInElevation) {
  for (const auto& env : Environment::presets()) {
    double prev = 0.0;
    for (double r = 2000.0; r >= 0.0; r -= 10.0) {
      const double p = los_probability(200.0, r, env);
      EXPECT_GE(p, prev);
      prev = p;
    }
  }
}

TEST(AvgPathLoss, CollapsesWhenLosIsCertain) {
  Environment env = Environment::urban();
  env.excess_nlos_db = env.excess_los_db;  // makes P_LoS irrelevant
  const RadioConfig radio;
  const Beam beam{40.0, 20.0};
  const double d = std::hypot(300.0, 120.0);
  const double expected =
      std::pow(10.0, (fspl_db(d, 2e9) + env.excess_los_db - antenna_gain_db(beam)) / 10.0);
  EXPECT_NEAR(avg_path_loss(120.0, 300.0, env, beam, radio) / expected, 1.0, 1e-12);
}

TEST(AvgPathLoss, HighAltitudeApproachesLosExcess) {
  const auto env = Environment::urban();
  const RadioConfig radio;
  const Beam beam{40.0, 20.0};
  const double h = 1e6;  // directly overhead
  const double ratio =
      avg_path_loss(h, 0.0, env, beam, radio) /
      db_to_linear(fspl_db(h, 2e9) - antenna_gain_db(beam));
  // The sigmoid saturates just short of 1 at 90 degrees elevation.
  const double p90 = 1.0 / (1.0 + 9.61 * std::exp(-0.16 * (90.0 - 9.61)));
  EXPECT_NEAR(ratio, p90 * std::pow(10.0, 0.3) + (1.0 - p90) * std::pow(10.0, 3.4), 1e-6);
  EXPECT_NEAR(ratio / db_to_linear(env.excess_los_db), 1.0, 0.05);
}

TEST(AvgPathLoss, NonDecreasingInHorizontalDistance) {
  const RadioConfig radio;
  const Beam beam{45.0, 30.0};
  for (const auto& env : Environment::presets()) {
    double prev = 0.0;
    for (double r = 0.0; r <= 1000.0; r += 1.0) {
      const double pl = avg_path_loss(300.0, r, env, beam, radio);
      ASSERT_GE(pl, prev) << env.name << " r=" << r;
      prev = pl;
    }
  }
}

TEST(AvgPathLoss, QuasiconvexInAltitude) {
  const RadioConfig radio;
  for (const auto& env : Environment::presets()) {
    for (double de : {50.0, 200.0, 500.0, 900.0}) {
      std::vector<double> values;
      for (double h = de * std::tan(std::numbers::pi / 12.0); h <= 3000.0; h += 0.5)
        values.push_back(mean_path_loss(h, de, env, radio, 0.0));
      std::size_t k = 0;
      while (k + 1 < values.size() && values[k + 1] <= values[k]) ++k;
      for (std::size_t i = k; i + 1 < values.size(); ++i)
        ASSERT_GE(values[i + 1], values[i] * (1.0 - 1e-12)) << env.name << " De=" << de;
    }
  }
}

TEST(AvgPathLoss, HigherNlosExcessNeverHelps) {
  const RadioConfig radio;
  Environment low = Environment::dense_urban();
  Environment high = low;
  high.excess_nlos_db += 6.0;
  for (double r = 0.0; r <= 800.0; r += 40.0)
    EXPECT_GE(mean_path_loss(150.0, r, high, radio, 0.0), mean_path_loss(150.0, r, low, radio, 0.0));
}

TEST(Units, DbRoundTrip) {
  for (double db = -150.0; db <= 150.0; db += 0.37)
    EXPECT_NEAR(linear_to_db(db_to_linear(db)), db, 1e-9);
}

TEST(Config, Validation) {
  EXPECT_NO_THROW(Environment::urban().validate());
  Environment bad = Environment::urban();
  bad.excess_nlos_db = 1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  EXPECT_EQ(Environment::by_name("high-rise").sigmoid_a, 27.23);
  EXPECT_THROW(Environment::by_name("lunar"), InvalidArgument);
  EXPECT_NEAR(RadioConfig{}.noise_power_dbm(), -170.0 + 10.0 * std::log10(20e6), 1e-12);
}
