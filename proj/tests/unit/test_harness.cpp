#include "sseplab/harness.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sseplab {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_first_line(const std::string& s) { return s.substr(s.find('\n') + 1); }

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("sseplab_unit_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

TEST(Config, ParsesRangesAndHexSeed) {
  const auto c = parse_config(R"({"schema_version": 1, "mode": "bounds", "grid": {"n": [8, 16], "theta": [0.5]},
    "times": {"start": 0.1, "stop": 0.5, "step": 0.1}, "seed": "0x10"})");
  EXPECT_EQ(c.mode, Mode::Bounds);
  ASSERT_EQ(c.times.size(), 5u);
  EXPECT_NEAR(c.times.back(), 0.5, 1e-12);
  EXPECT_EQ(c.seed, 16u);
}

TEST(Config, UnknownFieldIsNamed) {
  try {
    parse_config(R"({"schema_version": 1, "grid": {"n": [4], "theta": [0]}, "replica": 3})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "replica");
  }
}

TEST(Config, BadValuesNameTheirField) {
  auto field_of = [](const std::string& text) {
    try {
      validate_for_mode(parse_config(text), Mode::Profile);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string();
  };
  EXPECT_EQ(field_of(R"({"schema_version": 1, "grid": {"n": [2], "theta": [0]}, "times": [1], "replicas": 5})"), "grid.n");
  EXPECT_EQ(field_of(R"({"schema_version": 1, "grid": {"n": [4], "theta": [-1]}, "times": [1], "replicas": 5})"), "grid.theta");
  EXPECT_EQ(field_of(R"({"schema_version": 1, "grid": {"n": [4], "theta": [0]}, "times": [1], "replicas": 0})"), "replicas");
  EXPECT_EQ(field_of(R"({"schema_version": 1, "grid": {"n": [4], "theta": [0]}, "times": [1], "replicas": 5, "alpha": 1.5})"),
            "alpha");
  EXPECT_EQ(field_of(R"({"schema_version": 2, "grid": {"n": [4], "theta": [0]}, "times": [1], "replicas": 5})"), "schema_version");
}

TEST(Csv, DeterministicApartFromHeader) {
  const auto d = scratch("csv");
  CsvTable t{{"n", "x", "name"}, {}};
  t.add({std::int64_t{4}, 0.1, std::string("a")});
  t.add({std::int64_t{8}, 1.0 / 3.0, std::string("b")});
  emit_csv(t, d / "a.csv");
  emit_csv(t, d / "b.csv");
  const auto a = slurp(d / "a.csv");
  EXPECT_EQ(a.rfind("# generated ", 0), 0u);
  EXPECT_EQ(without_first_line(a), without_first_line(slurp(d / "b.csv")));
  EXPECT_NE(a.find("0.33333333333333331"), std::string::npos);
}

TEST(Hash, Fnv1a) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Run, ConfigErrorExitsTwoWithoutOutputs) {
  const auto d = scratch("bad");
  write(d / "c.json", R"({"schema_version": 1, "mode": "fluctuations", "grid": {"n": [8], "theta": [2]}, "times": [0.1],
    "replicas": 0, "test_functions": ["const"]})");
  RunRequest r{Mode::Fluctuations, d / "c.json", 1, std::nullopt, d / "out"};
  EXPECT_EQ(run(r), 2);
  EXPECT_FALSE(fs::exists(d / "out"));
}

TEST(Run, ModeMismatchIsConfigError) {
  const auto d = scratch("mismatch");
  write(d / "c.json", R"({"schema_version": 1, "mode": "spectrum", "grid": {"n": [4], "theta": [0]}})");
  EXPECT_EQ(run({Mode::Verify, d / "c.json", 1, std::nullopt, d / "out"}), 2);
}

TEST(Run, VerifyReportsHashAndIsDeterministic) {
  const auto d = scratch("verify");
  const std::string text = R"({"schema_version": 1, "mode": "verify", "grid": {"n": [3, 4, 5], "theta": [0, 1]}, "times": [0.1]})";
  write(d / "c.json", text);
  ASSERT_EQ(run({Mode::Verify, d / "c.json", 1, std::nullopt, d / "a"}), 0);
  ASSERT_EQ(run({Mode::Verify, d / "c.json", 2, std::nullopt, d / "b"}), 0);
  const auto report = slurp(d / "a" / "report.txt");
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(text);
  EXPECT_NE(report.find(hash.str()), std::string::npos);
  for (const char* s : {"CHECKS", "PROVENANCE", "TIMING"}) EXPECT_NE(report.find(s), std::string::npos);
  for (const auto& e : fs::directory_iterator(d / "a"))
    if (e.path().extension() == ".csv")
      EXPECT_EQ(without_first_line(slurp(e.path())), without_first_line(slurp(d / "b" / e.path().filename())));
}

TEST(Run, MonteCarloSeedPrecedence) {
  const auto d = scratch("seed");
  write(d / "c.json", R"({"schema_version": 1, "mode": "profile", "grid": {"n": [5], "theta": [0]}, "times": [0.1],
    "replicas": 50, "seed": 3})");
  ASSERT_LE(run({Mode::Profile, d / "c.json", 1, 9, d / "a"}), 1);
  ASSERT_LE(run({Mode::Profile, d / "c.json", 1, 9, d / "b"}), 1);
  ASSERT_LE(run({Mode::Profile, d / "c.json", 1, std::nullopt, d / "c"}), 1);
  const auto a = without_first_line(slurp(d / "a" / "profile_mc.csv"));
  EXPECT_EQ(a, without_first_line(slurp(d / "b" / "profile_mc.csv")));
  EXPECT_NE(a, without_first_line(slurp(d / "c" / "profile_mc.csv")));
  EXPECT_NE(slurp(d / "a" / "report.txt").find("--seed"), std::string::npos);
}

TEST(Version, CarriesName) { EXPECT_EQ(version_string().rfind("sseplab ", 0), 0u); }

}  // namespace
}  // namespace sseplab
