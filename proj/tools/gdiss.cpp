#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gdiss/cli.hpp"

namespace {

bool read_input(const std::string& path, std::string& text, std::string& error) {
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    return true;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    error = "cannot open '" + path + "'";
    return false;
  }
  text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return true;
}

bool write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return static_cast<bool>(std::cout);
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dissipative Gaussian state engineering: synthesis, certification and simulation"};
  app.require_subcommand(1, 1);

  gdiss::cli::CliOptions opts;
  std::string in_path, out_path, csv_path;
  double kappa = 0, delta = 0, horizon = 0, step = 0, omega_min = 0, omega_max = 0, v0 = 0;
  int omega_count = 0, stride = 0;

  auto add_common = [&](CLI::App* sub, bool takes_file) {
    if (takes_file) sub->add_option("--in", in_path, "problem file, or - for stdin");
    sub->add_option("--out", out_path, "report destination (default stdout)");
    sub->add_option("--csv", csv_path, "table destination");
    sub->add_option("--alpha", opts.alphas, "squeezing parameters, comma separated")
        ->delimiter(',');
    sub->add_option("--kappa", kappa, "coupling rate");
    sub->add_option("--horizon", horizon, "integration horizon");
    sub->add_option("--step", step, "integration step");
    sub->add_option("--omega-min", omega_min, "smallest nonzero frequency");
    sub->add_option("--omega-max", omega_max, "largest frequency");
    sub->add_option("--omega-count", omega_count, "log-spaced frequency count");
    sub->add_option("--v0-scale", v0, "initial covariance s I");
    sub->add_option("--stride", stride, "record every k-th integration step");
    sub->add_option("--graph", opts.graph, "preset graph name");
    sub->add_option("--modes", opts.modes, "mode count for the vacuum preset");
    sub->add_option("--delta", delta, "cavity detuning");
  };

  for (const char* name : {"synth", "verify", "simulate", "spectrum", "tradeoff", "memory"}) {
    add_common(app.add_subcommand(name), true);
  }
  CLI::App* preset = app.add_subcommand("preset", "print a known-good problem file");
  preset->add_option("name", opts.preset, "preset name")->required();
  add_common(preset, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gdiss::cli::kExitInput;
  }

  const CLI::App* sub = app.get_subcommands().front();
  auto given = [&](const char* flag) { return sub->count(flag) > 0; };
  if (given("--kappa")) opts.kappa = kappa;
  if (given("--delta")) opts.delta = delta;
  if (given("--horizon")) opts.horizon = horizon;
  if (given("--step")) opts.step = step;
  if (given("--omega-min")) opts.omega_min = omega_min;
  if (given("--omega-max")) opts.omega_max = omega_max;
  if (given("--omega-count")) opts.omega_count = omega_count;
  if (given("--v0-scale")) opts.v0_scale = v0;
  if (given("--stride")) opts.record_stride = stride;

  const std::string command = sub->get_name();
  std::optional<std::string> input;
  if (!in_path.empty()) {
    std::string text, error;
    if (!read_input(in_path, text, error)) {
      std::cerr << "error: " << error << "\n";
      return gdiss::cli::kExitInput;
    }
    input = std::move(text);
  }

  const gdiss::cli::CommandResult result = gdiss::cli::run_command(command, input, opts);

  if (command == "preset" && result.exit_code == gdiss::cli::kExitOk) {
    if (!write_output(out_path, result.text)) return gdiss::cli::kExitInput;
    return 0;
  }
  if (result.report.contains("error")) {
    std::cerr << "error: " << result.report["error"]["message"].get<std::string>() << "\n";
  } else if (result.report.contains("failing") && !result.report["failing"].empty()) {
    std::cerr << "failing checks:";
    for (const auto& name : result.report["failing"]) std::cerr << " " << name.get<std::string>();
    std::cerr << "\n";
  }
  if (command != "preset" && !write_output(out_path, result.report.dump(2) + "\n")) {
    return gdiss::cli::kExitInput;
  }
  if (!csv_path.empty() && !result.csv.empty() && !write_output(csv_path, result.csv)) {
    return gdiss::cli::kExitInput;
  }
  return result.exit_code;
}
