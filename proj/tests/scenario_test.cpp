#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "uavplan/scenario.hpp"

using namespace uavplan;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("uavplan_scenario_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Chance that a disk-uniform offset from a region-uniform parent stays in the
// region. With E|dx| = 4R/(3 pi) and E|dx dy| = R^2/(2 pi) for a uniform disk,
// E[(W-|dx|)(H-|dy|)]/(WH) expands in closed form (valid for R <= W, H).
double in_region_fraction(double w, double h, double r) {
  const double e_abs = 4.0 * r / (3.0 * std::numbers::pi);
  const double e_prod = r * r / (2.0 * std::numbers::pi);
  return 1.0 - e_abs / w - e_abs / h + e_prod / (w * h);
}

Scenario sample_scenario() {
  Scenario s;
  PcpConfig pcp;
  pcp.seed = 12345;
  s.users = generate_pcp(s.region, pcp);
  s.pcp = pcp;
  s.environment = Environment::dense_urban();
  s.radio.bandwidth_hz = 1e6;
  s.clustering.k_max = 6;
  return s;
}

}  // namespace

TEST(Rng, SplitMixReferenceValue) {
  // First output of the published SplitMix64 generator from state 0.
  EXPECT_EQ(mix_seed(0), 0xe220a8397b1dcdafULL);
}

TEST(Rng, EngineMatchesStandardReference) {
  Rng rng(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next();
  EXPECT_EQ(v, 9981545732273789042ULL);
}

TEST(Rng, UniformAndIndexStayInRange) {
  Rng rng(9);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.index(7), 7u);
  }
}

TEST(Rng, PoissonMomentsMatch) {
  for (double mean : {0.5, 9.0, 36.0, 1200.0}) {
    Rng rng(static_cast<std::uint64_t>(mean * 1000));
    const int n = 20000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(mean));
      sum += k;
      sq += k * k;
    }
    const double m = sum / n;
    const double var = sq / n - m * m;
    EXPECT_NEAR(m, mean, 4.0 * std::sqrt(mean / n)) << mean;
    EXPECT_NEAR(var, mean, 0.05 * mean) << mean;
  }
}

TEST(Pcp, SameSeedSamePoints) {
  PcpConfig cfg;
  cfg.seed = 42;
  const auto a = generate_pcp({}, cfg);
  const auto b = generate_pcp({}, cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_EQ(a[i].y, b[i].y);
  }
  cfg.seed = 43;
  const auto c = generate_pcp({}, cfg);
  EXPECT_FALSE(c.size() == a.size() && !c.empty() && c[0].x == a[0].x);
}

TEST(Pcp, PointsStayInRegion) {
  for (const Region region : {Region{}, Region{300, 2000}}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      PcpConfig cfg;
      cfg.seed = seed;
      for (const auto& p : generate_pcp(region, cfg)) {
        ASSERT_GE(p.x, 0.0);
        ASSERT_LE(p.x, region.width);
        ASSERT_GE(p.y, 0.0);
        ASSERT_LE(p.y, region.height);
      }
    }
  }
}

TEST(Pcp, MeanCountMatchesIntensityTimesInRegionFraction) {
  const Region region;
  PcpConfig cfg;
  const int n = 10000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    cfg.seed = mix_seed(static_cast<std::uint64_t>(i) + 1000000);
    const double k = static_cast<double>(generate_pcp(region, cfg).size());
    sum += k;
    sq += k * k;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  const double expected = cfg.parent_intensity * region.area() * cfg.mean_daughters *
                          in_region_fraction(region.width, region.height, cfg.cluster_radius);
  EXPECT_NEAR(mean, expected, 3.0 * se);
}

TEST(Pcp, RejectsNonPositiveParameters) {
  PcpConfig cfg;
  cfg.cluster_radius = 0.0;
  EXPECT_THROW(generate_pcp({}, cfg), InvalidArgument);
  EXPECT_THROW(generate_pcp({0.0, 10.0}, PcpConfig{}), InvalidArgument);
}

TEST(ScenarioFile, RoundTripIsExact) {
  const auto s = sample_scenario();
  ASSERT_FALSE(s.users.empty());
  const auto dir = temp_dir("roundtrip");
  save_scenario(dir / "a.json", s);
  const auto back = load_scenario(dir / "a.json");
  ASSERT_EQ(back.users.size(), s.users.size());
  for (std::size_t i = 0; i < s.users.size(); ++i) {
    EXPECT_EQ(back.users[i].x, s.users[i].x);
    EXPECT_EQ(back.users[i].y, s.users[i].y);
  }
  EXPECT_EQ(back.region, s.region);
  EXPECT_EQ(back.environment.name, "dense-urban");
  EXPECT_EQ(back.environment.sigmoid_a, s.environment.sigmoid_a);
  EXPECT_EQ(back.radio.bandwidth_hz, 1e6);
  EXPECT_EQ(back.clustering, s.clustering);
  ASSERT_TRUE(back.pcp.has_value());
  EXPECT_EQ(*back.pcp, *s.pcp);
  save_scenario(dir / "b.json", back);
  EXPECT_EQ(json_io::read_file(dir / "a.json"), json_io::read_file(dir / "b.json"));
}

TEST(ScenarioFile, MissingEnvironmentIsNamed) {
  auto j = scenario_to_json(sample_scenario());
  j.erase("environment");
  try {
    scenario_from_json(j);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "environment");
  }
}

TEST(ScenarioFile, NestedFieldErrorsCarryPath) {
  auto j = scenario_to_json(sample_scenario());
  j["radio"]["bandwidth_hz"] = "wide";
  try {
    scenario_from_json(j);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "radio.bandwidth_hz");
  }
  j = scenario_to_json(sample_scenario());
  j["users"][3] = {1.0};
  try {
    scenario_from_json(j);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "users[3]");
  }
}

TEST(ScenarioFile, UnknownFieldIsAcceptedWithWarning) {
  auto j = scenario_to_json(sample_scenario());
  j["future_feature"] = 7;
  j["radio"]["polarization"] = "V";
  std::vector<std::string> warnings;
  const auto s = scenario_from_json(j, &warnings);
  EXPECT_FALSE(s.users.empty());
  ASSERT_EQ(warnings.size(), 2u);
  EXPECT_NE(warnings[0].find("future_feature"), std::string::npos);
  EXPECT_NE(warnings[1].find("radio.polarization"), std::string::npos);
}

TEST(ScenarioFile, SyntaxErrorReportsLine) {
  const auto dir = temp_dir("syntax");
  json_io::write_file(dir / "bad.json", "{\n  \"region\": {\n    \"width\": 10,,\n  }\n}\n");
  try {
    load_scenario(dir / "bad.json");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ScenarioFile, RejectsUsersOutsideRegionAndEmptyScenarios) {
  auto j = scenario_to_json(sample_scenario());
  j["users"][0] = {5000.0, 1.0};
  EXPECT_THROW(scenario_from_json(j), ParseError);
  j["users"] = nlohmann::json::array();
  EXPECT_THROW(scenario_from_json(j), ParseError);
}

TEST(ScenarioFile, MissingFileIsIoError) {
  try {
    load_scenario("/nonexistent/dir/s.json");
    FAIL() << "expected an error";
  } catch (const ParseError&) {
    FAIL() << "missing file is not a parse error";
  } catch (const Error&) {
  }
}
