#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"
#include "spdc/cli/config.hpp"
#include "spdc/cli/run.hpp"

using namespace spdc;
using namespace spdc::cli;

namespace {

const std::string kMinimal = R"([run]
command = FOM

[geometry]
xi = 1
alpha = 1
phi0 = 0
zeta = 0

[indices]
np_over_ns = 1
np_over_ni = 1
np_over_nps = 1
np_over_npi = 1
)";

std::optional<Error> error_of(const std::string& text, std::optional<Command> cmd = std::nullopt) {
  try {
    parse_config(text, cmd);
  } catch (const Error& e) {
    return e;
  }
  return std::nullopt;
}

std::string config_path(const std::string& name) { return std::string(SPDC_CONFIG_DIR) + "/" + name; }

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "spdc_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

struct Invocation {
  int exit_code;
  std::string out;
};

Invocation invoke(const std::string& args, const std::string& out_name) {
  const auto out = scratch(out_name);
  std::filesystem::remove(out);
  const std::string cmd = std::string(SPDC_COUPLER_EXE) + " " + args + " --out " + out.string() + " 2>" +
                          scratch(out_name + ".err").string();
  const int status = std::system(cmd.c_str());
  Invocation r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, ""};
  if (std::filesystem::exists(out)) r.out = read_file(out.string());
  return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(ParseConfig, MinimalFom) {
  const RunConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.command, Command::Fom);
  ASSERT_TRUE(c.geometry);
  EXPECT_EQ(c.geometry->xi, 1.0);
  EXPECT_EQ(c.geometry->alpha, 1.0);
  EXPECT_EQ(c.geometry->phi0, 0.0);
  EXPECT_EQ(c.geometry->zeta, 0.0);
  EXPECT_EQ(c.effective_indices().np_over_ns, 1.0);
  EXPECT_EQ(c.output_format, OutputFormat::Csv);
}

TEST(ParseConfig, NegativeAlphaIsUnitRange) {
  std::string text = kMinimal;
  text.replace(text.find("alpha = 1"), 9, "alpha = -1");
  const auto e = error_of(text);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->code(), ErrorCode::kUnitRange);
}

TEST(ParseConfig, PhysicalSourceBandwidthRatio) {
  const RunConfig c = parse_config(read_file(config_path("ppln_782nm.ini")));
  ASSERT_TRUE(c.spectral);
  EXPECT_NEAR(c.spectral->delta(), 2.3534e-4, 1e-8);
  EXPECT_NEAR(c.spectral->filter_bandwidth(), 2.0 * math::kPi * 75e9, 1.0);
  ASSERT_TRUE(c.geometry);
  EXPECT_NEAR(c.geometry->xi, 0.7585, 1e-3);
}

TEST(ParseConfig, ParseErrorReportsLineAndColumn) {
  const auto e = error_of("[run]\ncommand = FOM\n\n[geometry]\nxi 1\n");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->code(), ErrorCode::kParseError);
  EXPECT_NE(std::string(e->what()).find("line 5"), std::string::npos);
  EXPECT_NE(std::string(e->what()).find("column"), std::string::npos);
}

TEST(ParseConfig, BadNumberReportsOffendingColumn) {
  std::string text = kMinimal;
  text.replace(text.find("phi0 = 0"), 8, "phi0 = 0.5x");
  const auto e = error_of(text);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->code(), ErrorCode::kParseError);
  EXPECT_NE(std::string(e->what()).find("line 7, column 11"), std::string::npos) << e->what();
}

TEST(ParseConfig, MissingKey) {
  std::string text = kMinimal;
  text.erase(text.find("xi = 1\n"), 7);
  const auto e = error_of(text);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->code(), ErrorCode::kMissingKey);
  EXPECT_FALSE(error_of("[geometry]\nxi = 1\nalpha = 1\nphi0 = 0\n", Command::Fom));
  EXPECT_EQ(error_of("[geometry]\nxi = 1\nalpha = 1\nphi0 = 0\n")->code(), ErrorCode::kMissingKey);
}

TEST(ParseConfig, UnknownKeyAndSection) {
  EXPECT_EQ(error_of(kMinimal + "\n[geometry_extra]\nxi = 1\n")->code(), ErrorCode::kUnknownKey);
  std::string text = kMinimal;
  text.replace(text.find("zeta = 0"), 8, "zeta = 0\nwaist = 3");
  EXPECT_EQ(error_of(text)->code(), ErrorCode::kUnknownKey);
}

TEST(ParseConfig, DuplicateKeyIsParseError) {
  EXPECT_EQ(error_of(kMinimal + "\n[run]\ncommand = FOM\n")->code(), ErrorCode::kParseError);
}

TEST(ParseConfig, SweepRequiresMaximizableMetric) {
  EXPECT_EQ(error_of("[run]\ncommand = OPTIMIZE\n[sweep]\nmetric = K0\nxi_values = 1\n")->code(), ErrorCode::kUnitRange);
  EXPECT_FALSE(error_of("[run]\ncommand = SWEEP\n[sweep]\nmetric = K0\nxi_values = 1\n"));
}

TEST(ParseConfig, SelftestNeedsEnoughSamples) {
  EXPECT_EQ(error_of("[run]\ncommand = SELFTEST\n[selftest]\nsamples = 1000\n")->code(), ErrorCode::kUnitRange);
}

TEST(RenderConfig, RoundTripsEveryShippedConfig) {
  for (const auto& entry : std::filesystem::directory_iterator(SPDC_CONFIG_DIR)) {
    const RunConfig c = parse_config(read_file(entry.path().string()));
    EXPECT_EQ(parse_config(render_config(c)), c) << entry.path();
  }
}

TEST(RenderConfig, RoundTripsAwkwardValues) {
  RunConfig c = parse_config(kMinimal);
  c.geometry->xi = 0.1 + 0.2;
  c.geometry->phi0 = -1e-300;
  c.poling = PolingSeries({{0, 1.0}, {1, 1.0 / 3.0}});
  c.output_path = "out dir/result.json";
  c.output_format = OutputFormat::Json;
  EXPECT_EQ(parse_config(render_config(c)), c);
}

TEST(Run, FomColumns) {
  const RunResult r = run(parse_config(kMinimal));
  ASSERT_EQ(r.table.rows.size(), 1u);
  EXPECT_EQ(r.table.columns.front(), "xi");
  EXPECT_EQ(r.table.columns.back(), "converged");
  EXPECT_EQ(r.exit_code(), 0);
}

TEST(Run, SpectralCurve) {
  const RunConfig c = parse_config(read_file(config_path("spectral.ini")));
  const RunResult r = run(c);
  const auto rows = csv_rows(to_csv(c, r.table));
  ASSERT_EQ(rows.size(), 52u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"delta", "omega2_factor"}));
  EXPECT_EQ(std::stod(rows[1][0]), 0.0);
  EXPECT_NEAR(std::stod(rows[1][1]), 0.752692800, 1e-6);
  EXPECT_NEAR(std::stod(rows.back()[0]), 5.0, 1e-12);
}

TEST(Run, OptimizeBoydKleinman) {
  const RunResult r = run(parse_config(read_file(config_path("optimize_k2.ini"))));
  ASSERT_EQ(r.table.rows.size(), 1u);
  const auto& row = r.table.rows[0];
  EXPECT_EQ(std::get<double>(row[0]), 2.84);
  EXPECT_NEAR(std::get<double>(row[1]), 1.414, 0.07);
  EXPECT_NEAR(std::get<double>(row[2]), 3.2, 0.2);
  EXPECT_EQ(r.exit_code(), 0);
}

TEST(Output, JsonCarriesConfigAndRecords) {
  RunConfig c = parse_config(kMinimal);
  c.output_format = OutputFormat::Json;
  const auto doc = nlohmann::json::parse(serialize(c, run(c).table));
  EXPECT_EQ(doc["command"], "FOM");
  EXPECT_EQ(parse_config(doc["config"].get<std::string>()), parse_config(kMinimal));
  ASSERT_EQ(doc["records"].size(), 1u);
  EXPECT_NEAR(doc["records"][0]["k0"].get<double>(), 0.125, 1e-3);
  EXPECT_EQ(doc["records"][0]["converged"], true);
}

TEST(Output, CsvHeaderReparses) {
  const RunConfig c = parse_config(kMinimal);
  const std::string csv = to_csv(c, run(c).table);
  const std::string first = csv.substr(0, csv.find('\n'));
  ASSERT_EQ(first.rfind("# config: ", 0), 0u);
  const auto rendered = nlohmann::json::parse(first.substr(10)).get<std::string>();
  EXPECT_EQ(parse_config(rendered), c);
}

TEST(Output, UnwritablePathIsIoError) {
  try {
    write_output("/nonexistent-dir/x.csv", "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

TEST(Executable, SelftestPasses) {
  const auto r = invoke("SELFTEST --config " + config_path("selftest.ini") + " --seed 42", "selftest.csv");
  EXPECT_EQ(r.exit_code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_GT(rows.size(), 10u);
  EXPECT_EQ(rows[0].back(), "pass");
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_EQ(rows[k].back(), "true") << rows[k][0];
}

TEST(Executable, ByteIdenticalAcrossRunsAndThreads) {
  const std::string args = "SWEEP --config " + config_path("k2_map.ini");
  const auto a = invoke(args + " --threads 1", "sweep_a.csv");
  const auto b = invoke(args + " --threads 1", "sweep_b.csv");
  const auto c = invoke(args + " --threads 3", "sweep_c.csv");
  ASSERT_EQ(a.exit_code, 0);
  ASSERT_FALSE(a.out.empty());
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
}

TEST(Executable, CommandArgumentOverridesConfig) {
  const auto r = invoke("spectral --config " + config_path("fom_minimal.ini") + " --format json", "override.json");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["command"], "SPECTRAL");
}

TEST(Executable, ErrorsExitWithOne) {
  const auto bad = scratch("bad.ini");
  write_output(bad.string(), "[run]\ncommand = FOM\n[geometry]\nxi = 1\nalpha = -1\nphi0 = 0\n");
  EXPECT_EQ(invoke("FOM --config " + bad.string(), "bad.csv").exit_code, 1);
  EXPECT_NE(read_file(scratch("bad.csv.err").string()).find("UNIT_RANGE"), std::string::npos);
  EXPECT_EQ(invoke("FOM --config " + scratch("missing.ini").string(), "missing.csv").exit_code, 1);
  EXPECT_NE(read_file(scratch("missing.csv.err").string()).find("IO_ERROR"), std::string::npos);
}
