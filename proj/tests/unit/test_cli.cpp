#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "reinsure/cli.hpp"

using namespace reinsure;
using namespace reinsure::cli;

namespace {

const std::string kBaseline = R"(command = check

[model]
family = exponential
mean = 1

[kernel]
family = quadratic
c = 0.5
gamma_r = 0.1

[market]
gamma = 0.1
epsilon = 0.05
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("reinsure_test_" + name);
}

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected a config error";
  return "";
}

}  // namespace

TEST(Cli, ParsesBaseline) {
  const RunConfig c = parse_config(kBaseline);
  EXPECT_EQ(c.command, Command::check);
  EXPECT_EQ(c.model->family(), LossFamily::exponential);
  EXPECT_DOUBLE_EQ(c.market.gamma, 0.1);
  EXPECT_DOUBLE_EQ(c.market.epsilon, 0.05);
  EXPECT_EQ(c.market.risk_measure, RiskMeasure::VaR);
  EXPECT_DOUBLE_EQ(c.kernel->gamma_r(), 0.1);
}

TEST(Cli, EpsilonOutOfRange) {
  const std::string msg = expect_config_error(replace(kBaseline, "epsilon = 0.05", "epsilon = 0.7"));
  EXPECT_NE(msg.find("epsilon must lie in (0, 0.5)"), std::string::npos) << msg;
}

TEST(Cli, KernelSlopeAboveOne) {
  const std::string msg = expect_config_error(replace(kBaseline, "c = 0.5", "c = 1.2"));
  EXPECT_NE(msg.find("kernel.c"), std::string::npos) << msg;
  EXPECT_NE(msg.find("<= 1"), std::string::npos) << msg;
}

TEST(Cli, StrictKeys) {
  EXPECT_NE(expect_config_error(replace(kBaseline, "mean = 1", "mean = 1\ncolour = red"))
                .find("model.colour"),
            std::string::npos);
  EXPECT_NE(expect_config_error(kBaseline + "\n[extra]\nx = 1\n").find("unknown section"),
            std::string::npos);
  EXPECT_NE(expect_config_error(replace(kBaseline, "gamma = 0.1\n", "")).find("market.gamma"),
            std::string::npos);
  EXPECT_NE(expect_config_error(replace(kBaseline, "command = check", "command = plot"))
                .find("command"),
            std::string::npos);
  EXPECT_NE(expect_config_error(replace(kBaseline, "mean = 1", "mean = one")).find("model.mean"),
            std::string::npos);
}

TEST(Cli, ParsesLayersAndLists) {
  const RunConfig c = parse_config(replace(kBaseline, "command = check", "command = evaluate") +
                                   "\n[contract]\nlayers = [[1, 2], [3, inf]]\n"
                                   "\n[sweep]\ngamma = [0.05, 0.1]\nepsilon = 0.05\n");
  ASSERT_TRUE(c.layers.has_value());
  ASSERT_EQ(c.layers->size(), 2u);
  EXPECT_TRUE(std::isinf((*c.layers)[1].detachment));
  EXPECT_EQ(c.sweep->gamma, (std::vector<double>{0.05, 0.1}));
  EXPECT_THROW(parse_config(kBaseline + "\n[contract]\nlayers = [[2, 1]]\n"), ConfigError);
  EXPECT_THROW(parse_config(kBaseline + "\n[contract]\nlayers = [[1, 2, 3]]\n"), ConfigError);
}

TEST(Cli, CheckEmitsConditionRow) {
  const RunOutput out = run(parse_config(kBaseline));
  std::istringstream lines(out.csv);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_NE(header.find("lhs"), std::string::npos);
  EXPECT_NE(row.find(",0.025,0.225625,"), std::string::npos) << row;
  EXPECT_NE(row.find("single-layer"), std::string::npos);
  EXPECT_NE(out.summary.find("predicted_shape"), std::string::npos);
}

TEST(Cli, OptimizeSummaryNamesLayer) {
  const RunOutput out = run(parse_config(replace(kBaseline, "command = check", "command = optimize")));
  EXPECT_NE(out.summary.find("[2.92149"), std::string::npos) << out.summary;
  EXPECT_NE(out.summary.find("2.995732"), std::string::npos) << out.summary;
  EXPECT_NE(out.csv.find("valuation,0,ratio,0.03340944"), std::string::npos) << out.csv;
  EXPECT_EQ(out.csv.rfind("section,index,name,value", 0), 0u);
}

TEST(Cli, SweepHasOneRowPerCellInLatticeOrder) {
  const RunOutput out = run(parse_config(replace(kBaseline, "command = check", "command = sweep") +
                                         "\n[sweep]\ngamma = 0.05, 0.1\ngamma_r = 0.1, 0.2\n"
                                         "epsilon = 0.05\n"));
  std::istringstream lines(out.csv);
  std::vector<std::string> rows;
  for (std::string l; std::getline(lines, l);) rows.push_back(l);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[1].rfind("0.05,0.1,0.05,single-layer", 0), 0u) << rows[1];
  EXPECT_EQ(rows[2].rfind("0.05,0.2,0.05,single-layer", 0), 0u) << rows[2];
  EXPECT_EQ(rows[3].rfind("0.1,0.1,0.05,single-layer", 0), 0u) << rows[3];
  EXPECT_EQ(rows[4].rfind("0.1,0.2,0.05,single-layer", 0), 0u) << rows[4];
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_NE(rows[i].find(",true"), std::string::npos) << rows[i];
}

TEST(Cli, OutputIsDeterministic) {
  for (const char* cmd : {"check", "optimize", "sweep"}) {
    const std::string text =
        replace(kBaseline, "command = check", std::string("command = ") + cmd) +
        "\n[sweep]\ngamma = 0.05, 0.1\ngamma_r = 0.1, 0.2\n";
    EXPECT_EQ(run(parse_config(text)).csv, run(parse_config(text)).csv) << cmd;
  }
}

TEST(Cli, EvaluateRequiresContract) {
  const RunConfig c = parse_config(replace(kBaseline, "command = check", "command = evaluate"));
  EXPECT_THROW(run(c), ConfigError);
}

TEST(Cli, EmpiricalCsvResolvesRelativeToConfig) {
  const auto dir = temp_path("empirical");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "table.csv") << "x,F\n1,0.3\n2,0.7\n4,0.95\n";
  const std::string text = replace(replace(kBaseline, "family = exponential", "family = empirical"),
                                   "mean = 1", "csv = table.csv");
  const RunConfig c = parse_config(text, dir);
  EXPECT_EQ(c.model->family(), LossFamily::empirical);
  EXPECT_THROW(parse_config(text, temp_path("missing")), ConfigError);
}

TEST(Cli, ExecuteExitCodes) {
  const auto cfg = temp_path("exec.ini");
  const auto csv = temp_path("exec.csv");
  std::ostringstream out, err;

  std::ofstream(cfg) << kBaseline;
  Invocation inv{cfg.string(), csv.string(), std::nullopt, std::nullopt, std::nullopt};
  EXPECT_EQ(execute(inv, out, err), kExitOk);
  EXPECT_EQ(read_file(csv).rfind("loading_ok,", 0), 0u);

  inv.command = "bogus";
  EXPECT_EQ(execute(inv, out, err), kExitConfig);
  inv.command.reset();

  inv.tol_quad = -1.0;
  EXPECT_EQ(execute(inv, out, err), kExitConfig);
  inv.tol_quad.reset();

  std::ofstream(cfg) << replace(replace(kBaseline, "command = check", "command = optimize"),
                                "gamma = 0.1\nepsilon", "gamma = 0.5\nepsilon");
  out.str("");
  err.str("");
  EXPECT_EQ(execute(inv, out, err), kExitSolver);
  EXPECT_NE(err.str().find("solver error"), std::string::npos);

  inv.config_path = temp_path("does_not_exist.ini").string();
  EXPECT_EQ(execute(inv, out, err), kExitConfig);
}

TEST(Cli, SamplesParse) {
  for (const auto& entry : std::filesystem::directory_iterator(REINSURE_SAMPLES_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(parse_config(read_file(entry.path()), entry.path().parent_path()))
        << entry.path();
  }
}
