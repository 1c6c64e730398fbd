#include <gtest/gtest.h>

#include <cstdlib>

#include "gdiss/cli.hpp"

using namespace gdiss;
using cli::CliOptions;
using cli::run_command;

namespace {

std::string preset_text(const std::string& name, CliOptions opts = {}) {
  opts.preset = name;
  const cli::CommandResult r = run_command("preset", std::nullopt, opts);
  EXPECT_EQ(r.exit_code, 0) << name;
  return r.text;
}

Json without_duration(Json j) {
  j.erase("duration_s");
  return j;
}

std::string error_message(const Json& report) {
  return report.contains("error") ? report["error"]["message"].get<std::string>() : "";
}

}  // namespace

TEST(ProblemFile, ParsesMinimalFileWithDefaults) {
  const ProblemFile pf = parse_problem(std::string(R"({"X": [[0]], "Y": [[2]], "P": [[[0, 1]]]})"));
  EXPECT_EQ(pf.graph.modes(), 1);
  EXPECT_EQ(pf.params.channels(), 1);
  EXPECT_EQ(pf.params.R(), RealMatrix::Zero(1, 1));
  EXPECT_EQ(pf.params.P()(0, 0), Complex(0, 1));
  EXPECT_FALSE(pf.G.has_value());
}

TEST(ProblemFile, ErrorsNameTheField) {
  auto message = [](const std::string& text) {
    try {
      parse_problem(text);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(R"({"X": [[0]], "P": [[1]]})").find("/Y"), std::string::npos);
  EXPECT_NE(message(R"({"X": [[0, 1], [0, 0]], "Y": [[1, 0], [0, 1]], "P": [[1], [1]]})")
                .find("/X"),
            std::string::npos);
  EXPECT_NE(message(R"({"X": [[0]], "Y": [[-1]], "P": [[1]]})").find("/Y"), std::string::npos);
  EXPECT_NE(message(R"({"X": [[0]], "Y": [[1]], "P": [[[1, 2, 3]]]})").find("/P/0/0"),
            std::string::npos);
  EXPECT_NE(message(R"({"X": [[0]], "Y": [[1]], "P": [[1]], "n": 2})").find("/n"),
            std::string::npos);
  EXPECT_NE(message(R"({"X": [[0]], "Y": [[1]], "P": [[1]], "Gamma": [[1]]})").find("/Gamma"),
            std::string::npos);
  EXPECT_NE(message(R"({"X": [[0]], "Y": [[1]], "P": [[1]], "options": {"V0": [[1]]}})")
                .find("/options/V0"),
            std::string::npos);
  EXPECT_NE(message("{\n  \"X\": [[0]],\n  \"Y\": [[1]\n}").find("line 4"), std::string::npos);
}

TEST(ProblemFile, PresetRoundTripPreservesMatrices) {
  for (const auto& name : preset_names()) {
    const PresetSpec spec = preset_by_name(name);
    const ProblemFile pf = parse_problem(preset_text(name));
    EXPECT_EQ(pf.name, name);
    EXPECT_EQ(pf.graph.X(), spec.graph.X()) << name;
    EXPECT_EQ(pf.graph.Y(), spec.graph.Y()) << name;
    EXPECT_EQ(pf.params.P(), spec.params.P()) << name;
    EXPECT_EQ(pf.params.R(), spec.params.R()) << name;
  }
}

TEST(FormatNumber, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, std::exp(-2.0), 1e-300, -123456.789}) {
    EXPECT_EQ(std::strtod(format_number(v).c_str(), nullptr), v);
  }
}

TEST(Commands, EveryPresetVerifies) {
  for (const auto& name : preset_names()) {
    const cli::CommandResult r = run_command("verify", preset_text(name), {});
    EXPECT_EQ(r.exit_code, 0) << name << "\n" << r.report.dump(2);
    EXPECT_TRUE(r.report["passed"].get<bool>());
  }
}

TEST(Commands, ReportHeaderAndDeterminism) {
  const std::string text = preset_text("tms");
  const cli::CommandResult a = run_command("synth", text, {});
  const cli::CommandResult b = run_command("synth", text, {});
  EXPECT_EQ(without_duration(a.report).dump(), without_duration(b.report).dump());
  EXPECT_EQ(a.report["command"], "synth");
  EXPECT_EQ(a.report["input_digest"], digest(text));
  EXPECT_TRUE(a.report.contains("tolerances"));
  EXPECT_TRUE(a.report.contains("duration_s"));
  EXPECT_TRUE(a.report["results"]["rank_ok"].get<bool>());
}

TEST(Commands, CavitySynthesisSpectrum) {
  const cli::CommandResult r = run_command("synth", preset_text("cavity"), {});
  ASSERT_EQ(r.exit_code, 0);
  for (const auto& ev : r.report["results"]["eig_A"]) {
    EXPECT_NEAR(ev[0].get<double>(), -1.0, 1e-14);
    EXPECT_NEAR(ev[1].get<double>(), 0.0, 1e-14);
  }
}

TEST(Commands, ZeroCouplingSynthExitsTwo) {
  const std::string text = R"({"X": [[0]], "Y": [[1]], "P": [[[0, 0]]]})";
  const cli::CommandResult r = run_command("synth", text, {});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(r.report["results"]["rank_ok"].get<bool>());
}

TEST(Commands, CorruptedHamiltonianFailsNamedCheck) {
  Json j = Json::parse(preset_text("cavity"));
  j["G"] = Json::array({Json::array({1e-3, 0.0}), Json::array({0.0, 2e-3})});
  const cli::CommandResult r = run_command("verify", j.dump(), {});
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(r.report["results"]["checks"]["G_condition"]["status"], "fail");
}

TEST(Commands, RankDeficientFailsRankAndHurwitz) {
  const std::string text =
      R"({"X": [[0, 0], [0, 0]], "Y": [[1, 0], [0, 1]], "P": [[[0, 1]], [[0, 0]]]})";
  const cli::CommandResult r = run_command("verify", text, {});
  EXPECT_EQ(r.exit_code, 3);
  const Json failing = r.report["failing"];
  EXPECT_EQ(failing, Json::array({"rank", "M_hurwitz"}));
}

TEST(Commands, SpectrumNeedsStableNullifier) {
  const std::string text = R"({"X": [[0]], "Y": [[1]], "P": [[[0, 0]]]})";
  EXPECT_EQ(run_command("spectrum", text, {}).exit_code, 4);
}

TEST(Commands, SpectrumCsvHasDcRowAndQuarterTurnAtUnitFrequency) {
  CliOptions opts;
  opts.omega_count = 7;  // 1e-3 .. 1e3 by decades, so omega = 1 is on the grid
  const cli::CommandResult r = run_command("spectrum", preset_text("cavity"), opts);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.csv.substr(0, r.csv.find('\n')), "omega,unitarity_dev,abs_F_0_0,arg_F_0_0");
  EXPECT_NE(r.csv.find("\n0,"), std::string::npos);
  const auto pos = r.csv.find("\n1,");
  ASSERT_NE(pos, std::string::npos);
  const std::string row = r.csv.substr(pos + 1, r.csv.find('\n', pos + 1) - pos - 1);
  const double arg = std::strtod(row.substr(row.rfind(',') + 1).c_str(), nullptr);
  EXPECT_NEAR(arg, M_PI / 2, 1e-12);
}

TEST(Commands, SimulateCavityFromThermalState) {
  CliOptions opts;
  opts.v0_scale = 5.0;
  const cli::CommandResult r = run_command("simulate", preset_text("cavity"), opts);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_LT(r.report["results"]["final_target_gap"].get<double>(), 1e-6);
  EXPECT_EQ(r.csv.substr(0, r.csv.find('\n')),
            "t,target_gap,nullifier_gap,min_uncertainty_eig,V_0_0,V_0_1,V_1_1");
  const auto lines = std::count(r.csv.begin(), r.csv.end(), '\n');
  EXPECT_LE(lines, 1002);
}

TEST(Commands, SimulateDivergenceExitsFour) {
  CliOptions opts;
  opts.step = 2.0;
  opts.horizon = 20.0;
  opts.v0_scale = 5.0;
  EXPECT_EQ(run_command("simulate", preset_text("cavity"), opts).exit_code, 4);
}

TEST(Commands, TradeoffOnChain) {
  CliOptions opts;
  opts.graph = "chain4";
  const cli::CommandResult r = run_command("tradeoff", std::nullopt, opts);
  ASSERT_EQ(r.exit_code, 0);
  for (const auto& row : r.report["results"]["rows"]) {
    EXPECT_NEAR(row["product"].get<double>(), 1.0, 1e-9);
  }
  EXPECT_GT(r.report["results"]["empirical_c"].get<double>(), 0.0);
  EXPECT_EQ(r.csv.substr(0, r.csv.find('\n')), "alpha,epsilon,T,product");
}

TEST(Commands, MemoryOnVacuum) {
  CliOptions opts;
  opts.graph = "vacuum";
  opts.kappa = 1.0;
  const cli::CommandResult r = run_command("memory", std::nullopt, opts);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NEAR(r.report["results"]["A"][0][0].get<double>(), -2.0, 1e-10);
  EXPECT_NEAR(r.report["results"]["A"][1][1].get<double>(), -2.0, 1e-10);
}

TEST(Commands, UnknownPresetListsValidNames) {
  CliOptions opts;
  opts.preset = "ring5";
  const cli::CommandResult r = run_command("preset", std::nullopt, opts);
  EXPECT_EQ(r.exit_code, 2);
  const std::string msg = error_message(r.report);
  for (const auto& name : preset_names()) EXPECT_NE(msg.find(name), std::string::npos);
}

TEST(Commands, MissingInputIsInputError) {
  EXPECT_EQ(run_command("verify", std::nullopt, {}).exit_code, 2);
  EXPECT_EQ(run_command("verify", std::string("{not json"), {}).exit_code, 2);
}

TEST(Commands, ToleranceOverrideIsRecorded) {
  const std::string text = preset_text("cavity");
  setenv(cli::kTolEnv, "10", 1);
  const cli::CommandResult r = run_command("verify", text, {});
  unsetenv(cli::kTolEnv);
  EXPECT_EQ(r.report["tol_override"].get<double>(), 10.0);
  EXPECT_NEAR(r.report["tolerances"]["unitarity"].get<double>(), 1e-9, 1e-24);
  setenv(cli::kTolEnv, "abc", 1);
  EXPECT_EQ(run_command("verify", text, {}).exit_code, 2);
  unsetenv(cli::kTolEnv);
}
